//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string so the page can stay plain JavaScript.

use qalg::algebra::{generate_algebra, random_block_generators, structure_decomposition, Block};
use qalg::channels::{apply, check_kraus, mix, observable_from_hermitian, measure, sample_outcomes, KrausChannel};
use qalg::linalg::{pauli, ComplexMatrix, Tolerances, C64};
use qalg::quantum::{bloch_to_density, density_to_bloch, BlochVector, DensityMatrix};
use qalg::random::rng_from_seed;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn qubit_channel(kind: &str, p: f64) -> qalg::Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(qalg::Error::Format(format!("strength must lie in [0, 1], got {p}")));
    }
    match kind {
        "dephasing" => mix(&[KrausChannel::identity(2), KrausChannel::dephasing(2)], &[1.0 - p, p]),
        "depolarizing" => mix(&[KrausChannel::identity(2), KrausChannel::completely_depolarizing(2)], &[1.0 - p, p]),
        "amplitude-damping" => {
            let r = |x: f64| C64::new(x, 0.0);
            let k0 = ComplexMatrix::from_row_major(2, 2, &[r(1.0), r(0.0), r(0.0), r((1.0 - p).sqrt())])?;
            let k1 = ComplexMatrix::from_row_major(2, 2, &[r(0.0), r(p.sqrt()), r(0.0), r(0.0)])?;
            KrausChannel::new(2, 2, vec![k0, k1])
        }
        other => Err(qalg::Error::Format(format!("unknown channel {other:?}"))),
    }
}

pub fn channel_report(kind: &str, p: f64, r: [f64; 3]) -> qalg::Result<Value> {
    let tol = Tolerances::default();
    let ch = qubit_channel(kind, p)?;
    let rho = bloch_to_density(&BlochVector::new(r)?);
    let out = DensityMatrix::new(apply(&ch, rho.matrix())?, &tol)?;
    let check = check_kraus(&ch, &tol)?;
    Ok(json!({
        "output": density_to_bloch(&out)?.r,
        "kraus_operators": ch.kraus().len(),
        "unital": check.unital,
        "min_choi_eigenvalue": check.min_choi_eigenvalue,
    }))
}

pub fn measurement_report(r: [f64; 3], axis: [f64; 3], samples: u64, seed: u64) -> qalg::Result<Value> {
    let tol = Tolerances::default();
    let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(qalg::Error::Format("measurement axis must be non-zero".into()));
    }
    let obs = (1..4).fold(ComplexMatrix::zeros(2, 2), |acc, k| acc + pauli(k).scale(axis[k - 1] / norm));
    let povm = observable_from_hermitian(&obs, &tol)?;
    let rho = bloch_to_density(&BlochVector::new(r)?);
    Ok(json!({
        "outcomes": povm.outcomes(),
        "probabilities": measure(&rho, &povm)?,
        "counts": sample_outcomes(&rho, &povm, samples, seed)?,
    }))
}

/// `blocks` lists `m x n` pairs separated by commas, e.g. `1x2,2x1`.
pub fn decomposition_report(blocks: &str, d0: usize, seed: u64) -> qalg::Result<Value> {
    let tol = Tolerances::default();
    let hidden = parse_blocks(blocks)?;
    let mut rng = rng_from_seed(seed);
    let (gens, _) = random_block_generators(&mut rng, &hidden, d0)?;
    let alg = generate_algebra(&gens, &tol)?;
    let st = structure_decomposition(&alg, seed, &tol)?;
    Ok(json!({
        "dim": st.dim(),
        "algebra_dim": alg.basis().len(),
        "signature": st.signature(),
        "d0": st.d0,
        "residual": st.residual,
    }))
}

fn parse_blocks(s: &str) -> qalg::Result<Vec<Block>> {
    let bad = || qalg::Error::Format(format!("expected blocks like 1x2,2x1, got {s:?}"));
    s.split(',')
        .map(|part| {
            let (m, n) = part.trim().split_once('x').ok_or_else(bad)?;
            let m = m.trim().parse().map_err(|_| bad())?;
            let n = n.trim().parse().map_err(|_| bad())?;
            Ok(Block { m, n })
        })
        .collect()
}

fn to_js(v: qalg::Result<Value>) -> Result<String, String> {
    v.map(|v| v.to_string()).map_err(|e| e.to_string())
}

/// Applies a qubit channel of the given strength to the Bloch vector `(x, y, z)`.
#[wasm_bindgen]
pub fn channel_on_bloch(kind: &str, p: f64, x: f64, y: f64, z: f64) -> Result<String, String> {
    to_js(channel_report(kind, p, [x, y, z]))
}

/// Measures `(x, y, z)` along the axis `(ax, ay, az)` and samples outcomes.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn measure_histogram(x: f64, y: f64, z: f64, ax: f64, ay: f64, az: f64, samples: u32, seed: u32) -> Result<String, String> {
    to_js(measurement_report([x, y, z], [ax, ay, az], samples.into(), seed.into()))
}

/// Hides the given block structure behind a random unitary and recovers it.
#[wasm_bindgen]
pub fn decompose_blocks(blocks: &str, d0: u32, seed: u32) -> Result<String, String> {
    to_js(decomposition_report(blocks, d0 as usize, seed.into()))
}
