//! JSON file formats.
//!
//! Matrices are `{"rows": r, "cols": c, "data": [[[re, im], ...], ...]}`.
//! Every other object embeds matrices in that form. Files hold one object
//! each and the kind is inferred from its keys ([`FileObject::parse`]).
//!
//! The `*File` types are the raw on-disk shapes. They check syntax and
//! matrix shapes only; semantic validation (positivity, completeness) happens
//! when they are converted into library types, so callers can tell a
//! malformed file from an invalid object.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{AlgebraStructure, Block, HybridState};
use crate::channels::{ChoiMatrix, KrausChannel, Povm, StinespringIsometry, StochasticMatrix};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerances, C64};
use crate::quantum::{BlochVector, Ensemble};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    data: Vec<Vec<[f64; 2]>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let data = (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| {
                let z = self.get(i, j);
                [z.re, z.im]
            }).collect())
            .collect();
        MatrixWire {
            rows: self.rows(),
            cols: self.cols(),
            data,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = MatrixWire::deserialize(d)?;
        if w.data.len() != w.rows || w.data.iter().any(|r| r.len() != w.cols) {
            return Err(D::Error::custom(format!(
                "matrix data does not have shape {}x{}",
                w.rows, w.cols
            )));
        }
        let m = ComplexMatrix::from_fn(w.rows, w.cols, |i, j| {
            let [re, im] = w.data[i][j];
            C64::new(re, im)
        });
        if !m.is_finite() {
            return Err(D::Error::custom("matrix has non-finite entries"));
        }
        Ok(m)
    }
}

/// A state vector, either a flat list of `[re, im]` pairs or a one-column
/// matrix.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
enum VectorWire {
    Flat(Vec<[f64; 2]>),
    Matrix(ComplexMatrix),
}

fn vector_from_wire(v: VectorWire) -> Result<ComplexMatrix> {
    match v {
        VectorWire::Flat(entries) => Ok(ComplexMatrix::from_fn(entries.len(), 1, |i, _| {
            C64::new(entries[i][0], entries[i][1])
        })),
        VectorWire::Matrix(m) if m.cols() == 1 => Ok(m),
        VectorWire::Matrix(m) => Err(Error::Format(format!("state vector has shape {:?}", m.shape()))),
    }
}

fn serialize_vector<S: Serializer>(v: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let flat: Vec<[f64; 2]> = (0..v.rows()).map(|i| [v.get(i, 0).re, v.get(i, 0).im]).collect();
    flat.serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleItem {
    pub p: f64,
    #[serde(serialize_with = "serialize_vector")]
    pub psi: ComplexMatrix,
}

impl<'de> Deserialize<'de> for EnsembleItem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            p: f64,
            psi: VectorWire,
        }
        let raw = Raw::deserialize(d)?;
        let psi = vector_from_wire(raw.psi).map_err(D::Error::custom)?;
        Ok(Self { p: raw.p, psi })
    }
}

/// `{"items": [{"p": …, "psi": [[re, im], …]}, …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub items: Vec<EnsembleItem>,
}

impl EnsembleFile {
    pub fn from_ensemble(e: &Ensemble) -> Self {
        Self {
            items: e
                .items()
                .iter()
                .map(|(p, psi)| EnsembleItem { p: *p, psi: psi.clone() })
                .collect(),
        }
    }

    pub fn into_ensemble(self) -> Result<Ensemble> {
        Ensemble::new(self.items.into_iter().map(|i| (i.p, i.psi)).collect())
    }
}

/// `{"dim": d, "generators": [matrix, …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub dim: usize,
    pub generators: Vec<ComplexMatrix>,
}

impl AlgebraFile {
    /// Checks that every generator is `dim × dim`.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Format("algebra dimension must be positive".into()));
        }
        for (k, g) in self.generators.iter().enumerate() {
            if g.shape() != (self.dim, self.dim) {
                return Err(Error::Format(format!(
                    "generator {k} is {:?}, expected {}x{}",
                    g.shape(),
                    self.dim,
                    self.dim
                )));
            }
        }
        Ok(())
    }
}

/// `{"u": matrix, "blocks": [{"m": …, "n": …}], "d0": …, "residual": …}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionFile {
    pub u: ComplexMatrix,
    pub blocks: Vec<Block>,
    pub d0: usize,
    pub residual: f64,
}

impl From<&AlgebraStructure> for DecompositionFile {
    fn from(s: &AlgebraStructure) -> Self {
        Self {
            u: s.u.clone(),
            blocks: s.blocks.clone(),
            d0: s.d0,
            residual: s.residual,
        }
    }
}

impl From<DecompositionFile> for AlgebraStructure {
    fn from(f: DecompositionFile) -> Self {
        Self {
            u: f.u,
            blocks: f.blocks,
            d0: f.d0,
            residual: f.residual,
        }
    }
}

/// Either `{"dim_in", "dim_out", "kraus"}` or `{"choi", "dims": [d_B, d_A]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelFile {
    Kraus {
        dim_in: usize,
        dim_out: usize,
        kraus: Vec<ComplexMatrix>,
    },
    Choi {
        choi: ComplexMatrix,
        dims: [usize; 2],
    },
}

impl ChannelFile {
    pub fn from_kraus(ch: &KrausChannel) -> Self {
        Self::Kraus {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus: ch.kraus().to_vec(),
        }
    }

    pub fn from_choi(x: &ChoiMatrix) -> Self {
        let (db, da) = x.dims();
        Self::Choi {
            choi: x.matrix().clone(),
            dims: [db, da],
        }
    }

    /// Shape-checked Choi matrix of the map, whichever form was stored.
    pub fn to_choi(&self) -> Result<ChoiMatrix> {
        match self {
            Self::Kraus { .. } => Ok(crate::channels::kraus_to_choi(&self.to_kraus_unchecked()?)),
            Self::Choi { choi, dims } => ChoiMatrix::new(choi.clone(), (dims[0], dims[1]))
                .map_err(|e| Error::Format(e.to_string())),
        }
    }

    /// Kraus form; a stored Choi matrix must be positive.
    pub fn to_kraus(&self, tol: &Tolerances) -> Result<KrausChannel> {
        match self {
            Self::Kraus { .. } => self.to_kraus_unchecked(),
            Self::Choi { .. } => crate::channels::choi_to_kraus(&self.to_choi()?, tol),
        }
    }

    fn to_kraus_unchecked(&self) -> Result<KrausChannel> {
        match self {
            Self::Kraus { dim_in, dim_out, kraus } => {
                KrausChannel::new(*dim_in, *dim_out, kraus.clone()).map_err(|e| Error::Format(e.to_string()))
            }
            Self::Choi { .. } => unreachable!("only called on the Kraus form"),
        }
    }
}

/// `{"v": matrix, "dim_out": d_B, "dim_env": d_E}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationFile {
    pub v: ComplexMatrix,
    pub dim_out: usize,
    pub dim_env: usize,
}

impl DilationFile {
    pub fn from_isometry(s: &StinespringIsometry) -> Self {
        Self {
            v: s.v().clone(),
            dim_out: s.dim_out(),
            dim_env: s.dim_env(),
        }
    }

    pub fn into_isometry(self) -> Result<StinespringIsometry> {
        StinespringIsometry::new(self.v, self.dim_out, self.dim_env).map_err(|e| Error::Format(e.to_string()))
    }
}

/// `{"outcomes": [labels], "effects": [matrix, …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmFile {
    pub outcomes: Vec<String>,
    pub effects: Vec<ComplexMatrix>,
}

impl PovmFile {
    pub fn from_povm(m: &Povm) -> Self {
        Self {
            outcomes: m.outcomes().to_vec(),
            effects: m.effects().iter().map(|e| e.matrix().clone()).collect(),
        }
    }

    pub fn into_povm(self, tol: &Tolerances) -> Result<Povm> {
        Povm::new(self.outcomes, self.effects, tol)
    }
}

/// `{"pi": [[row], …]}`, column-stochastic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticFile {
    pub pi: Vec<Vec<f64>>,
}

impl StochasticFile {
    pub fn from_stochastic(pi: &StochasticMatrix) -> Self {
        Self {
            pi: pi.rows_ref().to_vec(),
        }
    }

    pub fn into_stochastic(self) -> Result<StochasticMatrix> {
        StochasticMatrix::new(self.pi)
    }
}

/// `{"probs": [pᵢ], "states": [ρᵢ], "blocks": [{"m", "n"}], "u": matrix}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridFile {
    pub probs: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    pub blocks: Vec<Block>,
    pub u: ComplexMatrix,
}

impl From<&HybridState> for HybridFile {
    fn from(h: &HybridState) -> Self {
        Self {
            probs: h.probs.clone(),
            states: h.states.iter().map(|s| s.matrix().clone()).collect(),
            blocks: h.structure.blocks.clone(),
            u: h.structure.u.clone(),
        }
    }
}

/// `{"r": [x, y, z]}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochFile {
    pub r: [f64; 3],
}

impl From<&BlochVector> for BlochFile {
    fn from(b: &BlochVector) -> Self {
        Self { r: b.r }
    }
}

/// Any object this crate reads, dispatched on its keys.
#[derive(Clone, Debug, PartialEq)]
pub enum FileObject {
    Matrix(ComplexMatrix),
    Ensemble(EnsembleFile),
    Algebra(AlgebraFile),
    Decomposition(DecompositionFile),
    Channel(ChannelFile),
    Dilation(DilationFile),
    Povm(PovmFile),
    Stochastic(StochasticFile),
    Hybrid(HybridFile),
    Bloch(BlochFile),
}

impl FileObject {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Matrix(_) => "matrix",
            Self::Ensemble(_) => "ensemble",
            Self::Algebra(_) => "algebra",
            Self::Decomposition(_) => "decomposition",
            Self::Channel(_) => "channel",
            Self::Dilation(_) => "dilation",
            Self::Povm(_) => "povm",
            Self::Stochastic(_) => "stochastic",
            Self::Hybrid(_) => "hybrid",
            Self::Bloch(_) => "bloch",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Format("expected a JSON object".into()))?;
        let has = |k: &str| obj.contains_key(k);
        fn from<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T> {
            serde_json::from_value(v).map_err(|e| Error::Format(e.to_string()))
        }
        Ok(if has("data") {
            Self::Matrix(from(value)?)
        } else if has("items") {
            Self::Ensemble(from(value)?)
        } else if has("generators") {
            Self::Algebra(from(value)?)
        } else if has("probs") {
            Self::Hybrid(from(value)?)
        } else if has("blocks") {
            Self::Decomposition(from(value)?)
        } else if has("kraus") || has("choi") {
            Self::Channel(from(value)?)
        } else if has("v") {
            Self::Dilation(from(value)?)
        } else if has("effects") {
            Self::Povm(from(value)?)
        } else if has("pi") {
            Self::Stochastic(from(value)?)
        } else if has("r") {
            Self::Bloch(from(value)?)
        } else {
            let keys: Vec<&String> = obj.keys().collect();
            return Err(Error::Format(format!("unrecognized object with keys {keys:?}")));
        })
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

impl Serialize for FileObject {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Matrix(x) => x.serialize(s),
            Self::Ensemble(x) => x.serialize(s),
            Self::Algebra(x) => x.serialize(s),
            Self::Decomposition(x) => x.serialize(s),
            Self::Channel(x) => x.serialize(s),
            Self::Dilation(x) => x.serialize(s),
            Self::Povm(x) => x.serialize(s),
            Self::Stochastic(x) => x.serialize(s),
            Self::Hybrid(x) => x.serialize(s),
            Self::Bloch(x) => x.serialize(s),
        }
    }
}

/// Compact JSON text.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("in-memory objects serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, rng_from_seed};

    #[test]
    fn matrix_round_trip_is_exact() {
        let mut rng = rng_from_seed(110);
        let m = random_matrix(&mut rng, 3, 2).scale(1.0 / 3.0);
        let text = to_json(&m);
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(FileObject::parse(&text).unwrap(), FileObject::Matrix(m));
    }

    #[test]
    fn matrix_shape_is_checked() {
        let bad = r#"{"rows":2,"cols":1,"data":[[[1,0]]]}"#;
        assert!(matches!(FileObject::parse(bad), Err(Error::Format(_))));
        assert!(FileObject::parse("[1,2]").is_err());
        assert!(FileObject::parse(r#"{"nothing":1}"#).is_err());
    }

    #[test]
    fn ensemble_vectors_in_both_forms() {
        let flat = r#"{"items":[{"p":1.0,"psi":[[1,0],[0,0]]}]}"#;
        let column = r#"{"items":[{"p":1.0,"psi":{"rows":2,"cols":1,"data":[[[1,0]],[[0,0]]]}}]}"#;
        let (FileObject::Ensemble(a), FileObject::Ensemble(b)) =
            (FileObject::parse(flat).unwrap(), FileObject::parse(column).unwrap())
        else {
            panic!("not ensembles");
        };
        assert_eq!(a, b);
        let e = a.into_ensemble().unwrap();
        assert_eq!(FileObject::parse(&to_json(&EnsembleFile::from_ensemble(&e))).unwrap().kind(), "ensemble");
    }

    #[test]
    fn channel_forms() {
        let ch = KrausChannel::dephasing(2);
        let text = to_json(&ChannelFile::from_kraus(&ch));
        let FileObject::Channel(f) = FileObject::parse(&text).unwrap() else {
            panic!("not a channel")
        };
        assert_eq!(f.to_kraus(&Tolerances::default()).unwrap(), ch);
        let choi = ChannelFile::from_choi(&f.to_choi().unwrap());
        let FileObject::Channel(g) = FileObject::parse(&to_json(&choi)).unwrap() else {
            panic!("not a channel")
        };
        assert!(matches!(g, ChannelFile::Choi { dims: [2, 2], .. }));
    }

    #[test]
    fn kinds_dispatch_on_keys() {
        let cases = [
            (r#"{"dim":1,"generators":[]}"#, "algebra"),
            (r#"{"outcomes":["a"],"effects":[{"rows":1,"cols":1,"data":[[[1,0]]]}]}"#, "povm"),
            (r#"{"pi":[[1.0]]}"#, "stochastic"),
            (r#"{"r":[0,0,1]}"#, "bloch"),
            (r#"{"v":{"rows":1,"cols":1,"data":[[[1,0]]]},"dim_out":1,"dim_env":1}"#, "dilation"),
            (r#"{"u":{"rows":1,"cols":1,"data":[[[1,0]]]},"blocks":[{"m":1,"n":1}],"d0":0,"residual":0.0}"#, "decomposition"),
        ];
        for (text, kind) in cases {
            let obj = FileObject::parse(text).unwrap();
            assert_eq!(obj.kind(), kind);
            assert_eq!(FileObject::parse(&to_json(&obj)).unwrap(), obj);
        }
    }
}
