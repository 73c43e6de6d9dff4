//! Completely positive maps in Kraus, Choi and Stinespring form, POVMs,
//! coarse-graining and classical stochastic channels.

mod choi;
mod classical;
mod kraus;
mod povm;
mod stinespring;

pub use choi::{
    check_choi, check_kraus, choi_from_map, choi_to_kraus, kraus_to_choi, partial_transpose, ChannelCheck, ChoiMatrix,
    KRAUS_CUTOFF,
};
pub use classical::{classical_apply, StochasticMatrix, STOCHASTIC_EPS};
pub use kraus::{adjoint_apply, apply, combine, compose, mix, tensor, Combine, KrausChannel, TP_EPS};
pub use povm::{
    accessible_effect, coarse_grain, is_sharp, measure, observable_from_hermitian, sample_outcomes, Povm,
    COMPLETENESS_EPS, PROBABILITY_CLIP, SHARP_EPS,
};
pub use stinespring::{dilation_intertwiner, stinespring_dilate, Intertwiner, StinespringIsometry, SAME_CHANNEL_EPS};
