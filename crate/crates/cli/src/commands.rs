use std::path::Path;

use qalg::algebra::{canonical_state as hybrid_form, center, generate_algebra_in, structure_decomposition, OFF_PATTERN_EPS};
use qalg::channels::{
    apply, check_choi, choi_to_kraus, kraus_to_choi, measure as born_rule, partial_transpose, sample_outcomes,
    stinespring_dilate, Povm,
};
use qalg::io::{
    AlgebraFile, BlochFile, ChannelFile, DecompositionFile, DilationFile, FileObject, HybridFile,
};
use qalg::linalg::{eigh, hs_inner, is_positive, partial_trace, ComplexMatrix, Subsystem};
use qalg::quantum::{
    bloch_to_density, density_from_ensemble, density_to_bloch, entropy as von_neumann, is_pure, shannon_entropy,
    BlochVector, DensityMatrix, NORMALIZATION_EPS,
};
use serde::Serialize;

use crate::report::Report;
use crate::{CheckKind, Context, Failure, Side};

/// Residual below which a converted representation counts as equivalent.
const ACTION_EPS: f64 = 1e-9;

fn read(path: &Path) -> Result<FileObject, Failure> {
    Ok(FileObject::read(path)?)
}

fn wrong_kind(path: &Path, obj: &FileObject, want: &str) -> Failure {
    Failure::Input(format!("{}: expected {want}, found {}", path.display(), obj.kind()))
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    match read(path)? {
        FileObject::Matrix(m) => Ok(m),
        other => Err(wrong_kind(path, &other, "a matrix")),
    }
}

fn read_channel(path: &Path) -> Result<ChannelFile, Failure> {
    match read(path)? {
        FileObject::Channel(c) => Ok(c),
        other => Err(wrong_kind(path, &other, "a channel")),
    }
}

fn read_state(ctx: &Context, path: &Path) -> Result<DensityMatrix, Failure> {
    match read(path)? {
        FileObject::Matrix(m) => Ok(DensityMatrix::new(m, &ctx.tol)?),
        FileObject::Ensemble(e) => Ok(density_from_ensemble(&e.into_ensemble()?)),
        other => Err(wrong_kind(path, &other, "a state")),
    }
}

fn emit(report: &mut Report, obj: &impl Serialize) {
    report.output = Some(serde_json::to_value(obj).expect("objects serialize"));
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<(), Failure> {
    if m.is_square() && m.rows() > 0 {
        Ok(())
    } else {
        Err(Failure::Input(format!("{what} must be square, got {:?}", m.shape())))
    }
}

pub fn check(ctx: &Context, kind: CheckKind, path: &Path, report: &mut Report) -> Result<(), Failure> {
    report.metric("kind", format!("{kind:?}").to_lowercase());
    match kind {
        CheckKind::State => {
            let m = read_matrix(path)?;
            require_square(&m, "state")?;
            let pos = is_positive(&m, &ctx.tol)?;
            let trace_deviation = (m.trace() - qalg::linalg::ONE).norm();
            report
                .metric("min_eigenvalue", pos.min_eigenvalue)
                .metric("hermiticity_residual", pos.hermiticity_residual)
                .metric("trace_deviation", trace_deviation)
                .verdict(pos.positive && trace_deviation <= NORMALIZATION_EPS);
        }
        CheckKind::Effect => {
            let m = read_matrix(path)?;
            require_square(&m, "effect")?;
            let lower = is_positive(&m, &ctx.tol)?;
            let upper = is_positive(&(&ComplexMatrix::identity(m.rows()) - &m), &ctx.tol)?;
            report
                .metric("min_eigenvalue", lower.min_eigenvalue)
                .metric("max_eigenvalue", 1.0 - upper.min_eigenvalue)
                .metric("hermiticity_residual", lower.hermiticity_residual)
                .verdict(lower.positive && upper.positive);
        }
        CheckKind::Povm => {
            let file = match read(path)? {
                FileObject::Povm(p) => p,
                other => return Err(wrong_kind(path, &other, "a POVM")),
            };
            let d = file.effects.first().map_or(0, ComplexMatrix::rows);
            let mut sum = ComplexMatrix::zeros(d, d);
            let mut min_eig = f64::INFINITY;
            for e in &file.effects {
                if e.shape() != (d, d) {
                    return Err(Failure::Input(format!("effects of shapes {:?} and {:?}", (d, d), e.shape())));
                }
                min_eig = min_eig.min(eigh(e).values.first().copied().unwrap_or(0.0));
                sum = sum + e;
            }
            report
                .metric("outcomes", file.outcomes.len())
                .metric("min_eigenvalue", min_eig)
                .metric("completeness_residual", sum.distance(&ComplexMatrix::identity(d)));
            match file.into_povm(&ctx.tol) {
                Ok(m) => {
                    report.metric("sharp", qalg::channels::is_sharp(&m)).verdict(true);
                }
                Err(e) => {
                    eprintln!("qalg check: {e}");
                    report.metric("reason", e.to_string()).verdict(false);
                }
            }
        }
        CheckKind::Channel => {
            let x = read_channel(path)?.to_choi()?;
            let c = check_choi(&x, &ctx.tol)?;
            let (db, da) = x.dims();
            report
                .metric("dim_in", da)
                .metric("dim_out", db)
                .metric("cp", c.cp)
                .metric("tp", c.tp)
                .metric("unital", c.unital)
                .metric("min_choi_eigenvalue", c.min_choi_eigenvalue)
                .metric("hermiticity_residual", c.hermiticity_residual)
                .metric("tp_residual", c.tp_residual)
                .metric("unital_residual", c.unital_residual)
                .verdict(c.cp && c.tp);
        }
    }
    Ok(())
}

/// Largest deviation between two maps on the matrix units `|i⟩⟨j|`.
fn action_residual(
    d: usize,
    f: impl Fn(&ComplexMatrix) -> qalg::Result<ComplexMatrix>,
    g: impl Fn(&ComplexMatrix) -> qalg::Result<ComplexMatrix>,
) -> Result<f64, Failure> {
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let e = ComplexMatrix::unit(d, i, j);
            worst = worst.max(f(&e)?.distance(&g(&e)?));
        }
    }
    Ok(worst)
}

pub fn choi(ctx: &Context, path: &Path, report: &mut Report) -> Result<(), Failure> {
    let file = read_channel(path)?;
    let x = file.to_choi()?;
    let c = check_choi(&x, &ctx.tol)?;
    report
        .metric("min_choi_eigenvalue", c.min_choi_eigenvalue)
        .metric("trace", x.matrix().trace().re)
        .metric("cp", c.cp);
    if c.cp {
        let back = kraus_to_choi(&choi_to_kraus(&x, &ctx.tol)?);
        let r = back.matrix().distance(x.matrix());
        report.metric("round_trip_residual", r).verdict(r < ACTION_EPS);
    }
    emit(report, &ChannelFile::from_choi(&x));
    Ok(())
}

pub fn kraus(ctx: &Context, path: &Path, report: &mut Report) -> Result<(), Failure> {
    let file = read_channel(path)?;
    let x = file.to_choi()?;
    let ch = choi_to_kraus(&x, &ctx.tol)?;
    let r = kraus_to_choi(&ch).matrix().distance(x.matrix());
    report
        .metric("kraus_rank", ch.kraus().len())
        .metric("tp_residual", ch.tp_residual())
        .metric("round_trip_residual", r)
        .verdict(r < ACTION_EPS);
    emit(report, &ChannelFile::from_kraus(&ch));
    Ok(())
}

pub fn dilate(ctx: &Context, path: &Path, report: &mut Report) -> Result<(), Failure> {
    let ch = read_channel(path)?.to_kraus(&ctx.tol)?;
    let v = stinespring_dilate(&ch, &ctx.tol)?;
    let r = action_residual(ch.dim_in(), |e| v.apply(e), |e| apply(&ch, e))?;
    report
        .metric("dim_env", v.dim_env())
        .metric("isometry_residual", v.isometry_residual())
        .metric("tp", ch.is_trace_preserving())
        .metric("action_residual", r)
        .verdict(r < ACTION_EPS);
    emit(report, &DilationFile::from_isometry(&v));
    Ok(())
}

pub fn ptrace(
    path: &Path,
    dims: (usize, usize),
    side: Side,
    transpose: bool,
    report: &mut Report,
) -> Result<(), Failure> {
    let m = read_matrix(path)?;
    let subsystem = match side {
        Side::A => Subsystem::A,
        Side::B => Subsystem::B,
    };
    let out = if transpose {
        let t = partial_transpose(&m, dims, subsystem)?;
        report.metric("min_eigenvalue", eigh(&t).values.first().copied().unwrap_or(0.0));
        t
    } else {
        partial_trace(&m, dims, subsystem)?
    };
    let t = out.trace();
    report.metric("trace", [t.re, t.im]);
    emit(report, &out);
    Ok(())
}

pub fn bloch(ctx: &Context, path: &Path, report: &mut Report) -> Result<(), Failure> {
    match read(path)? {
        FileObject::Matrix(m) => {
            let rho = DensityMatrix::new(m, &ctx.tol)?;
            let b = density_to_bloch(&rho)?;
            report.metric("r", b.r).metric("norm", b.norm()).metric("pure", is_pure(&rho));
            emit(report, &BlochFile::from(&b));
        }
        FileObject::Bloch(f) => {
            let b = BlochVector::new(f.r)?;
            let rho = bloch_to_density(&b);
            report.metric("norm", b.norm()).metric("pure", is_pure(&rho));
            emit(report, rho.matrix());
        }
        other => return Err(wrong_kind(path, &other, "a qubit state or Bloch vector")),
    }
    Ok(())
}

pub fn entropy(ctx: &Context, path: &Path, bits: bool, report: &mut Report) -> Result<(), Failure> {
    let scale = if bits { std::f64::consts::LN_2 } else { 1.0 };
    report.metric("unit", if bits { "bits" } else { "nats" });
    match read(path)? {
        FileObject::Matrix(m) => {
            let rho = DensityMatrix::new(m, &ctx.tol)?;
            report.metric("entropy", von_neumann(&rho) / scale);
        }
        FileObject::Ensemble(f) => {
            let e = f.into_ensemble()?;
            let s = von_neumann(&density_from_ensemble(&e)) / scale;
            let h = shannon_entropy(&e.weights())? / scale;
            report
                .metric("entropy", s)
                .metric("mixing_entropy", h)
                .metric("slack", h - s)
                .verdict(h - s >= -1e-9);
        }
        other => return Err(wrong_kind(path, &other, "a state or ensemble")),
    }
    Ok(())
}

fn read_algebra(ctx: &Context, path: &Path) -> Result<qalg::algebra::MatrixAlgebra, Failure> {
    let file: AlgebraFile = match read(path)? {
        FileObject::Algebra(a) => a,
        other => return Err(wrong_kind(path, &other, "an algebra")),
    };
    file.validate()?;
    Ok(generate_algebra_in(file.dim, &file.generators, &ctx.tol)?)
}

pub fn canonical_state(ctx: &Context, algebra: &Path, state: &Path, report: &mut Report) -> Result<(), Failure> {
    report.seeded(ctx.seed);
    let a = read_algebra(ctx, algebra)?;
    let r = read_matrix(state)?;
    require_square(&r, "state")?;
    let h = hybrid_form(&a, &r, ctx.seed, &ctx.tol)?;
    let back = h.reconstruct();
    let mut worst: f64 = 0.0;
    for b in a.basis() {
        worst = worst.max((hs_inner(b, &back)? - hs_inner(b, &r)?).norm());
    }
    report
        .metric("probs", &h.probs)
        .metric("signature", h.structure.signature())
        .metric("functional_residual", worst)
        .verdict(worst < 1e-8);
    emit(report, &HybridFile::from(&h));
    Ok(())
}

pub fn decompose(ctx: &Context, path: &Path, report: &mut Report) -> Result<(), Failure> {
    report.seeded(ctx.seed);
    let a = read_algebra(ctx, path)?;
    let st = structure_decomposition(&a, ctx.seed, &ctx.tol)?;
    report
        .metric("algebra_dim", a.dim())
        .metric("center_dim", center(&a, &ctx.tol)?.dim())
        .metric("signature", st.signature())
        .metric("d0", st.d0)
        .metric("residual", st.residual)
        .verdict(st.residual < OFF_PATTERN_EPS);
    emit(report, &DecompositionFile::from(&st));
    Ok(())
}

pub fn measure(
    ctx: &Context,
    state: &Path,
    povm: &Path,
    samples: Option<u64>,
    report: &mut Report,
) -> Result<(), Failure> {
    let rho = read_state(ctx, state)?;
    let m: Povm = match read(povm)? {
        FileObject::Povm(p) => p.into_povm(&ctx.tol)?,
        other => return Err(wrong_kind(povm, &other, "a POVM")),
    };
    let p = born_rule(&rho, &m)?;
    report
        .metric("outcomes", m.outcomes())
        .metric("probabilities", &p)
        .metric("sharp", qalg::channels::is_sharp(&m));
    if let Some(n) = samples {
        report.seeded(ctx.seed);
        let counts = sample_outcomes(&rho, &m, n, ctx.seed)?;
        report.metric("samples", n).metric("counts", counts);
    }
    report.verdict(true);
    Ok(())
}
