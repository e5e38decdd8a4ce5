//! Block-diagonalization precoders and zero-forcing combiners.
//!
//! Every design reduces to [`bd_precoder`]: restrict the transmit space to the
//! null space of a complementary (interfering) channel, then pick the
//! dominant right singular vectors of the user's own channel projected onto
//! that space. The methods differ only in which matrices they treat as "own"
//! and "complementary":
//!
//! | method         | F1 own / nulls            | F2 own / nulls            |
//! |----------------|---------------------------|---------------------------|
//! | PIB            | G1ΩJ / H2                 | H2 / G1ΩJ                 |
//! | FIB            | G1ΩJ / [H2; G2ΩJ]         | H2 + G2ΩJ / G1ΩJ          |
//! | NING_ADAPTED   | G1ΩJ / none               | H2 / dominant Ns rows of J |
//! | NO_IRS_BD      | H1 (direct) / H2          | H2 / H1                   |

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::channel::ChannelSet;
use crate::irs::{cascade, PhaseProfile};
use crate::matgebra::{null_space_basis, pseudo_inverse, svd, CMatrix, LinalgError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("BD infeasible: {tx} transmit antennas cannot null {nulled} rows and carry {streams} streams over a {own}-row channel")]
    Feasibility { tx: usize, nulled: usize, streams: usize, own: usize },
    #[error("null space of dimension {available} is smaller than the {streams} requested streams")]
    Rank { available: usize, streams: usize },
    #[error("transmit power must be positive and finite, got {0}")]
    Power(f64),
    #[error("ZF combiner for UE{ue}: effective channel is rank deficient (condition {condition:.3e})")]
    Combiner { ue: u8, condition: f64 },
    #[error("method {0} needs the direct BS-UE1 channel")]
    MissingDirectChannel(MethodId),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Precoder design being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MethodId {
    Pib,
    Fib,
    NingAdapted,
    NoIrsBd,
}

impl MethodId {
    pub const ALL: [MethodId; 4] = [MethodId::Pib, MethodId::Fib, MethodId::NingAdapted, MethodId::NoIrsBd];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Pib => "PIB",
            MethodId::Fib => "FIB",
            MethodId::NingAdapted => "NING_ADAPTED",
            MethodId::NoIrsBd => "NO_IRS_BD",
        }
    }

    pub fn uses_irs(self) -> bool {
        !matches!(self, MethodId::NoIrsBd)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        MethodId::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| format!("unknown method `{s}` (expected one of PIB, FIB, NING_ADAPTED, NO_IRS_BD)"))
    }
}

/// Channels as seen by each UE for one method family.
#[derive(Debug, Clone)]
pub struct EffectiveChannels<T: Real> {
    /// UE1's channel from the BS: G1ΩJ, or the direct substitute.
    pub ue1: CMatrix<T>,
    /// H2
    pub ue2_direct: CMatrix<T>,
    /// G2ΩJ; absent without an IRS.
    pub ue2_reflected: Option<CMatrix<T>>,
}

impl<T: Real> EffectiveChannels<T> {
    pub fn with_irs(channels: &ChannelSet<T>, phase: &PhaseProfile<T>) -> Result<Self, LinalgError> {
        Ok(Self {
            ue1: cascade(&channels.g1, phase, &channels.j)?,
            ue2_direct: channels.h2.clone(),
            ue2_reflected: Some(cascade(&channels.g2, phase, &channels.j)?),
        })
    }

    pub fn without_irs(ue1_direct: &CMatrix<T>, h2: &CMatrix<T>) -> Self {
        Self { ue1: ue1_direct.clone(), ue2_direct: h2.clone(), ue2_reflected: None }
    }

    /// H2 + G2ΩJ.
    pub fn ue2_composite(&self) -> CMatrix<T> {
        match &self.ue2_reflected {
            Some(r) => &self.ue2_direct + r,
            None => self.ue2_direct.clone(),
        }
    }

    pub fn tx_antennas(&self) -> usize {
        self.ue1.cols()
    }
}

/// A nulling constraint a design promises: `channel · F_user = 0`.
#[derive(Debug, Clone)]
pub struct NullConstraint<T: Real> {
    pub label: &'static str,
    /// 1 or 2: whose precoder is nulled.
    pub user: u8,
    pub channel: CMatrix<T>,
}

#[derive(Debug, Clone)]
pub struct PrecoderSet<T: Real> {
    pub f1: CMatrix<T>,
    pub f2: CMatrix<T>,
    pub per_user_power: [T; 2],
    pub nulls: Vec<NullConstraint<T>>,
}

impl<T: Real> PrecoderSet<T> {
    pub fn precoder(&self, user: u8) -> &CMatrix<T> {
        if user == 1 {
            &self.f1
        } else {
            &self.f2
        }
    }

    /// Same directions at a different total power (equal split).
    pub fn rescaled(&self, total_power: T) -> Result<Self, DesignError> {
        let half = check_power(total_power)? / T::lit(2.0);
        let f1 = self.f1.scale((half / self.per_user_power[0]).sqrt());
        let f2 = self.f2.scale((half / self.per_user_power[1]).sqrt());
        Ok(Self { f1, f2, per_user_power: [half, half], nulls: self.nulls.clone() })
    }

    /// `‖H̃·F‖_F / (‖H̃‖_F ‖F‖_F)` for every promised null.
    pub fn null_residuals(&self) -> Vec<(&'static str, T)> {
        self.nulls
            .iter()
            .map(|n| {
                let f = self.precoder(n.user);
                let denom = n.channel.norm_fro() * f.norm_fro();
                let num = (&n.channel * f).norm_fro();
                (n.label, if denom > T::zero() { num / denom } else { num })
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct CombinerSet<T: Real> {
    pub w1: CMatrix<T>,
    pub w2: CMatrix<T>,
}

fn check_power<T: Real>(p: T) -> Result<T, DesignError> {
    if p > T::zero() && p.is_finite() {
        Ok(p)
    } else {
        Err(DesignError::Power(p.to_f64_lossy()))
    }
}

/// BD precoder for one user.
///
/// Returns `F = Ṽ₀ · V₁` scaled to `trace(F Fᴴ) = power`, where `Ṽ₀` spans
/// the null space of `complementary` (the whole space when `None`) and `V₁`
/// holds the `streams` dominant right singular vectors of `own · Ṽ₀`.
pub fn bd_precoder<T: Real>(
    own: &CMatrix<T>,
    complementary: Option<&CMatrix<T>>,
    streams: usize,
    power: T,
) -> Result<CMatrix<T>, DesignError> {
    let power = check_power(power)?;
    let tx = own.cols();
    let nulled = complementary.map_or(0, CMatrix::rows);
    if let Some(c) = complementary {
        if c.cols() != tx {
            return Err(LinalgError::DimensionMismatch { op: "bd_precoder", left: own.shape(), right: c.shape() }.into());
        }
    }
    if streams == 0 || streams > own.rows() || tx < nulled + streams {
        return Err(DesignError::Feasibility { tx, nulled, streams, own: own.rows() });
    }

    let basis = match complementary {
        Some(c) => match null_space_basis(c, T::default_rank_tol()) {
            Ok(b) => b,
            Err(LinalgError::NoNullSpace { .. }) => return Err(DesignError::Rank { available: 0, streams }),
            Err(e) => return Err(e.into()),
        },
        None => CMatrix::identity(tx),
    };
    if basis.cols() < streams {
        return Err(DesignError::Rank { available: basis.cols(), streams });
    }

    let projected = own.try_mul(&basis)?;
    let signal = svd(&projected)?.v.leading_cols(streams);
    let f = basis.try_mul(&signal)?;
    Ok(f.scale((power / f.norm_fro_sqr()).sqrt()))
}

fn split<T: Real>(total_power: T) -> Result<T, DesignError> {
    Ok(check_power(total_power)? / T::lit(2.0))
}

/// Partial-IRS BD: the IRS leakage G2ΩJ is ignored.
pub fn build_pib<T: Real>(eff: &EffectiveChannels<T>, streams: usize, total_power: T) -> Result<PrecoderSet<T>, DesignError> {
    let p = split(total_power)?;
    let f1 = bd_precoder(&eff.ue1, Some(&eff.ue2_direct), streams, p)?;
    let f2 = bd_precoder(&eff.ue2_direct, Some(&eff.ue1), streams, p)?;
    Ok(PrecoderSet {
        f1,
        f2,
        per_user_power: [p, p],
        nulls: vec![
            NullConstraint { label: "H2·F1", user: 1, channel: eff.ue2_direct.clone() },
            NullConstraint { label: "G1ΩJ·F2", user: 2, channel: eff.ue1.clone() },
        ],
    })
}

/// Full-IRS BD: UE2's direct and reflected channels are nulled as two
/// separate receivers; UE2's signal space uses the composite H2 + G2ΩJ.
pub fn build_fib<T: Real>(eff: &EffectiveChannels<T>, streams: usize, total_power: T) -> Result<PrecoderSet<T>, DesignError> {
    let p = split(total_power)?;
    let reflected = eff.ue2_reflected.as_ref().ok_or(DesignError::Linalg(LinalgError::InvalidArgument(
        "FIB needs the IRS leakage channel",
    )))?;
    let stacked = CMatrix::vstack(&[&eff.ue2_direct, reflected])?;
    let f1 = bd_precoder(&eff.ue1, Some(&stacked), streams, p)?;
    let f2 = bd_precoder(&eff.ue2_composite(), Some(&eff.ue1), streams, p)?;
    Ok(PrecoderSet {
        f1,
        f2,
        per_user_power: [p, p],
        nulls: vec![
            NullConstraint { label: "H2·F1", user: 1, channel: eff.ue2_direct.clone() },
            NullConstraint { label: "G2ΩJ·F1", user: 1, channel: reflected.clone() },
            NullConstraint { label: "G1ΩJ·F2", user: 2, channel: eff.ue1.clone() },
        ],
    })
}

/// Single-IRS adaptation of the per-user-IRS baseline: F2 avoids the
/// dominant `streams`-dimensional right singular subspace of J (the BS-IRS
/// link), F1 is matched to G1ΩJ with no nulling.
pub fn build_ning_adapted<T: Real>(
    eff: &EffectiveChannels<T>,
    j: &CMatrix<T>,
    streams: usize,
    total_power: T,
) -> Result<PrecoderSet<T>, DesignError> {
    let p = split(total_power)?;
    let dominant = svd(j)?.v.leading_cols(streams.min(j.cols())).adjoint();
    let f1 = bd_precoder(&eff.ue1, None, streams, p)?;
    let f2 = bd_precoder(&eff.ue2_direct, Some(&dominant), streams, p)?;
    Ok(PrecoderSet {
        f1,
        f2,
        per_user_power: [p, p],
        nulls: vec![NullConstraint { label: "V_J,domᴴ·F2", user: 2, channel: dominant }],
    })
}

/// Classic two-user BD with a direct UE1 channel in place of the IRS path.
pub fn build_no_irs_benchmark<T: Real>(
    eff: &EffectiveChannels<T>,
    streams: usize,
    total_power: T,
) -> Result<PrecoderSet<T>, DesignError> {
    let p = split(total_power)?;
    let f1 = bd_precoder(&eff.ue1, Some(&eff.ue2_direct), streams, p)?;
    let f2 = bd_precoder(&eff.ue2_direct, Some(&eff.ue1), streams, p)?;
    Ok(PrecoderSet {
        f1,
        f2,
        per_user_power: [p, p],
        nulls: vec![
            NullConstraint { label: "H2·F1", user: 1, channel: eff.ue2_direct.clone() },
            NullConstraint { label: "H1·F2", user: 2, channel: eff.ue1.clone() },
        ],
    })
}

/// Dispatches on `method`. `eff` must be the IRS view for IRS methods and
/// the direct view for [`MethodId::NoIrsBd`].
pub fn build_precoders<T: Real>(
    method: MethodId,
    eff: &EffectiveChannels<T>,
    j: &CMatrix<T>,
    streams: usize,
    total_power: T,
) -> Result<PrecoderSet<T>, DesignError> {
    match method {
        MethodId::Pib => build_pib(eff, streams, total_power),
        MethodId::Fib => build_fib(eff, streams, total_power),
        MethodId::NingAdapted => build_ning_adapted(eff, j, streams, total_power),
        MethodId::NoIrsBd => {
            if eff.ue2_reflected.is_some() {
                return Err(DesignError::MissingDirectChannel(method));
            }
            build_no_irs_benchmark(eff, streams, total_power)
        }
    }
}

fn zf_combiner<T: Real>(effective: &CMatrix<T>, ue: u8) -> Result<CMatrix<T>, DesignError> {
    let f = svd(effective)?;
    let s = &f.singular_values;
    let cond = f.condition_estimate();
    if s.len() < effective.cols() || !(s[s.len() - 1] > T::default_rank_tol() * s[0]) {
        return Err(DesignError::Combiner { ue, condition: cond.to_f64_lossy() });
    }
    Ok(pseudo_inverse(effective)?.adjoint())
}

/// `W1 = ((H̄1 F1)⁺)ᴴ`, `W2 = ((H2 F2)⁺)ᴴ`, so `Wᴴ·(target·F) = I`.
pub fn build_combiners<T: Real>(eff: &EffectiveChannels<T>, precoders: &PrecoderSet<T>) -> Result<CombinerSet<T>, DesignError> {
    let w1 = zf_combiner(&eff.ue1.try_mul(&precoders.f1)?, 1)?;
    let w2 = zf_combiner(&eff.ue2_direct.try_mul(&precoders.f2)?, 2)?;
    Ok(CombinerSet { w1, w2 })
}
