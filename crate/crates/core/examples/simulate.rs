//! Multisensory enhancement: a multimodal neuron responds more strongly to
//! coincident audio and visual stimuli than to either alone, and the
//! response fades as the two stimuli move apart.

use scf::field::{
    AreaParams, FieldConfig, ReceptiveField, ScfModel, ScfParams, Stimulus, TrainableGroups, UnimodalArea,
};

const N: usize = 17;

fn bump(row: usize, col: usize) -> Vec<f64> {
    let mut out = vec![0.0; N * N];
    for r in 0..N {
        for c in 0..N {
            let dr = r.abs_diff(row).min(N - r.abs_diff(row)) as f64;
            let dc = c.abs_diff(col).min(N - c.abs_diff(col)) as f64;
            out[r * N + c] = 0.6 * (-(dr * dr + dc * dc) / 2.0).exp();
        }
    }
    out
}

fn main() -> scf::Result<()> {
    let config = FieldConfig::default();
    let identity: Vec<Vec<f64>> = (0..N * N).map(|i| (0..N * N).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    // stimuli enter the grid directly so their locations are explicit
    let unimodal = ["audio", "visual"]
        .iter()
        .map(|name| UnimodalArea {
            name: name.to_string(),
            params: config.unimodal,
            receptive_field: ReceptiveField::from_rows(identity.clone()).unwrap(),
            feedback: config.feedback,
            gain: config.gain,
        })
        .collect();
    let model = ScfModel::new(ScfParams {
        shape: scf::field::GridShape::new(N, N)?,
        steps: config.steps,
        unimodal,
        // a threshold between one and two modalities' worth of drive makes the
        // multimodal area a coincidence detector, so enhancement is easy to see
        multimodal: AreaParams { theta: 12.0, ..config.multimodal },
        trainable: TrainableGroups::default(),
    })?;

    let silent = vec![0.0; N * N];
    let centre = 8 * N + 8;
    let respond = |a: &[f64], v: &[f64]| -> scf::Result<f64> {
        let out = model.run_forward(&[Stimulus::new("audio", a.to_vec()), Stimulus::new("visual", v.to_vec())])?;
        Ok(out.embedding[centre])
    };

    println!("audio only   {:.4}", respond(&bump(8, 8), &silent)?);
    println!("visual only  {:.4}", respond(&silent, &bump(8, 8))?);
    println!("both         {:.4}", respond(&bump(8, 8), &bump(8, 8))?);
    println!();
    println!("visual offset  multimodal peak");
    for offset in 0..=6 {
        let out = model.run_forward(&[
            Stimulus::new("audio", bump(8, 8)),
            Stimulus::new("visual", bump(8, 8 + offset)),
        ])?;
        let peak = out.embedding.iter().cloned().fold(0.0, f64::max);
        println!("{offset:>13}  {peak:.4}");
    }
    Ok(())
}
