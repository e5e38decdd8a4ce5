//! Per-UE SINR, spectral efficiency and sum spectral efficiency.
//!
//! For UE `k` with combiner `W`, the post-combining signal, interference and
//! noise covariances are
//!
//! ```text
//! UE1: S = W1ᴴ H̄1 F1 (·)ᴴ                         I = W1ᴴ H̄1 F2 (·)ᴴ
//! UE2: S = W2ᴴ H2 F2 (·)ᴴ + W2ᴴ G2ΩJ F2 (·)ᴴ       I = W2ᴴ (H2 + G2ΩJ) F1 (·)ᴴ
//! N  = σ² Wᴴ W, or σ² I (see [`NoiseModel`])
//! ```
//!
//! and the SINR matrix is `Γ = S (N + I)⁻¹` with scalar SINR `γ = tr Γ`.

use thiserror::Error;

use crate::matgebra::{determinant, inverse, CMatrix, LinalgError};
use crate::scalar::Real;
use crate::txrx::{CombinerSet, EffectiveChannels, PrecoderSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("I + Γ is not positive definite (det = {re:.6e}{im:+.6e}i)")]
    NotPositiveDefinite { re: f64, im: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How the spectral efficiency is read off the SINR matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeMode {
    /// `log2 det(I + Γ)`
    #[default]
    Determinant,
    /// `log2(1 + tr Γ)`
    Scalar,
}

/// Post-combining noise covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    /// `σ² Wᴴ W`: the covariance of `Wᴴ n` for white receiver noise.
    #[default]
    Combined,
    /// `σ² I`, independent of the combiner.
    Identity,
}

/// Covariance decomposition at one UE.
#[derive(Debug, Clone)]
pub struct SinrParts<T: Real> {
    pub signal: CMatrix<T>,
    pub interference: CMatrix<T>,
    pub noise: CMatrix<T>,
    /// `S (N + I)⁻¹`
    pub gamma_matrix: CMatrix<T>,
    pub gamma: T,
}

impl<T: Real> SinrParts<T> {
    fn assemble(signal: CMatrix<T>, interference: CMatrix<T>, noise: CMatrix<T>) -> Result<Self, MetricsError> {
        let r = noise.try_add(&interference)?;
        let gamma_matrix = signal.try_mul(&inverse(&r)?)?;
        let gamma = gamma_matrix.trace().re;
        Ok(Self { signal, interference, noise, gamma_matrix, gamma })
    }

    pub fn signal_power(&self) -> T {
        self.signal.trace().re
    }

    pub fn interference_power(&self) -> T {
        self.interference.trace().re
    }

    pub fn noise_power(&self) -> T {
        self.noise.trace().re
    }
}

/// `X Xᴴ`
fn gram<T: Real>(x: &CMatrix<T>) -> CMatrix<T> {
    x * &x.adjoint()
}

fn noise_cov<T: Real>(w: &CMatrix<T>, var: T, model: NoiseModel) -> CMatrix<T> {
    match model {
        NoiseModel::Combined => w.adjoint_mul(w).expect("square product").scale(var),
        NoiseModel::Identity => CMatrix::identity(w.cols()).scale(var),
    }
}

pub fn sinr_ue1<T: Real>(
    eff: &EffectiveChannels<T>,
    precoders: &PrecoderSet<T>,
    combiners: &CombinerSet<T>,
    noise_var: T,
    model: NoiseModel,
) -> Result<SinrParts<T>, MetricsError> {
    let w = &combiners.w1;
    let wh_h = w.adjoint_mul(&eff.ue1)?;
    let signal = gram(&wh_h.try_mul(&precoders.f1)?);
    let interference = gram(&wh_h.try_mul(&precoders.f2)?);
    SinrParts::assemble(signal, interference, noise_cov(w, noise_var, model))
}

pub fn sinr_ue2<T: Real>(
    eff: &EffectiveChannels<T>,
    precoders: &PrecoderSet<T>,
    combiners: &CombinerSet<T>,
    noise_var: T,
    model: NoiseModel,
) -> Result<SinrParts<T>, MetricsError> {
    let w = &combiners.w2;
    let direct = w.adjoint_mul(&eff.ue2_direct)?;
    let mut signal = gram(&direct.try_mul(&precoders.f2)?);
    if let Some(reflected) = &eff.ue2_reflected {
        let wr = w.adjoint_mul(reflected)?;
        signal = signal.try_add(&gram(&wr.try_mul(&precoders.f2)?))?;
    }
    let interference = gram(&w.adjoint_mul(&eff.ue2_composite())?.try_mul(&precoders.f1)?);
    SinrParts::assemble(signal, interference, noise_cov(w, noise_var, model))
}

/// Spectral efficiency in bits/s/Hz from an SINR matrix.
pub fn spectral_efficiency<T: Real>(gamma_matrix: &CMatrix<T>, mode: SeMode) -> Result<T, MetricsError> {
    match mode {
        SeMode::Determinant => {
            let shifted = gamma_matrix.try_add(&CMatrix::identity(gamma_matrix.rows()))?;
            let d = determinant(&shifted)?;
            let tol = T::lit(1e-6) * d.norm();
            if !(d.re > T::zero()) || d.im.abs() > tol || !d.re.is_finite() {
                return Err(MetricsError::NotPositiveDefinite { re: d.re.to_f64_lossy(), im: d.im.to_f64_lossy() });
            }
            Ok(d.re.log2().max(T::zero()))
        }
        SeMode::Scalar => {
            let t = T::one() + gamma_matrix.trace().re;
            if !(t > T::zero()) || !t.is_finite() {
                return Err(MetricsError::NotPositiveDefinite { re: t.to_f64_lossy(), im: 0.0 });
            }
            Ok(t.log2().max(T::zero()))
        }
    }
}

/// One realization's link-level figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetrics {
    pub gamma1: f64,
    pub gamma2: f64,
    pub se1: f64,
    pub se2: f64,
    pub se_sum: f64,
    pub signal_power: [f64; 2],
    pub interference_power: [f64; 2],
    pub noise_power: [f64; 2],
}

impl LinkMetrics {
    pub fn from_parts<T: Real>(ue1: &SinrParts<T>, ue2: &SinrParts<T>, mode: SeMode) -> Result<Self, MetricsError> {
        let se1 = spectral_efficiency(&ue1.gamma_matrix, mode)?.to_f64_lossy();
        let se2 = spectral_efficiency(&ue2.gamma_matrix, mode)?.to_f64_lossy();
        Ok(Self {
            gamma1: ue1.gamma.to_f64_lossy(),
            gamma2: ue2.gamma.to_f64_lossy(),
            se1,
            se2,
            se_sum: sum_se(se1, se2),
            signal_power: [ue1.signal_power().to_f64_lossy(), ue2.signal_power().to_f64_lossy()],
            interference_power: [ue1.interference_power().to_f64_lossy(), ue2.interference_power().to_f64_lossy()],
            noise_power: [ue1.noise_power().to_f64_lossy(), ue2.noise_power().to_f64_lossy()],
        })
    }
}

pub fn sum_se(se1: f64, se2: f64) -> f64 {
    se1 + se2
}

/// Settings that shape the metric evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSettings<T> {
    pub noise_var: [T; 2],
    pub se_mode: SeMode,
    pub noise_model: NoiseModel,
}

pub fn evaluate<T: Real>(
    eff: &EffectiveChannels<T>,
    precoders: &PrecoderSet<T>,
    combiners: &CombinerSet<T>,
    settings: &MetricSettings<T>,
) -> Result<LinkMetrics, MetricsError> {
    let u1 = sinr_ue1(eff, precoders, combiners, settings.noise_var[0], settings.noise_model)?;
    let u2 = sinr_ue2(eff, precoders, combiners, settings.noise_var[1], settings.noise_model)?;
    LinkMetrics::from_parts(&u1, &u2, settings.se_mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgebra::complex_gaussian;
    use num_complex::Complex;
    use crate::txrx::{build_combiners, build_no_irs_benchmark, bd_precoder};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    // Straight-line evaluation from raw index loops, sharing no code with
    // the implementation above.
    fn bf_mul(a: &CMatrix<f64>, b: &CMatrix<f64>) -> Vec<Vec<C>> {
        let mut out = vec![vec![C::new(0.0, 0.0); b.cols()]; a.rows()];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, o) in row.iter_mut().enumerate() {
                for k in 0..a.cols() {
                    *o += a[(i, k)] * b[(k, j)];
                }
            }
        }
        out
    }

    fn bf_adj(a: &CMatrix<f64>) -> CMatrix<f64> {
        CMatrix::from_fn(a.cols(), a.rows(), |r, c| a[(c, r)].conj())
    }

    fn to_m(v: Vec<Vec<C>>) -> CMatrix<f64> {
        CMatrix::from_fn(v.len(), v[0].len(), |r, c| v[r][c])
    }

    fn chain(ms: &[&CMatrix<f64>]) -> CMatrix<f64> {
        let mut acc = ms[0].clone();
        for m in &ms[1..] {
            acc = to_m(bf_mul(&acc, m));
        }
        acc
    }

    fn inv2(m: &CMatrix<f64>) -> CMatrix<f64> {
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let det = a * d - b * c;
        CMatrix::from_fn(2, 2, |r, col| match (r, col) {
            (0, 0) => d / det,
            (0, 1) => -b / det,
            (1, 0) => -c / det,
            _ => a / det,
        })
    }

    fn add(a: &CMatrix<f64>, b: &CMatrix<f64>) -> CMatrix<f64> {
        CMatrix::from_fn(a.rows(), a.cols(), |r, c| a[(r, c)] + b[(r, c)])
    }

    fn tr(a: &CMatrix<f64>) -> f64 {
        (0..a.rows()).map(|i| a[(i, i)].re).sum()
    }

    /// γ1 straight from the defining trace expression.
    fn oracle_gamma1(h1: &CMatrix<f64>, f1: &CMatrix<f64>, f2: &CMatrix<f64>, w1: &CMatrix<f64>, var: f64) -> f64 {
        let w1h = bf_adj(w1);
        let sig = chain(&[&w1h, h1, f1, &bf_adj(f1), &bf_adj(h1), w1]);
        let int = chain(&[&w1h, h1, f2, &bf_adj(f2), &bf_adj(h1), w1]);
        let noise = chain(&[&w1h, w1]).scale(var);
        tr(&chain(&[&sig, &inv2(&add(&noise, &int))]))
    }

    fn oracle_gamma2(
        h2: &CMatrix<f64>,
        g2oj: &CMatrix<f64>,
        f1: &CMatrix<f64>,
        f2: &CMatrix<f64>,
        w2: &CMatrix<f64>,
        var: f64,
    ) -> f64 {
        let w2h = bf_adj(w2);
        let direct = chain(&[&w2h, h2, f2, &bf_adj(f2), &bf_adj(h2), w2]);
        let refl = chain(&[&w2h, g2oj, f2, &bf_adj(f2), &bf_adj(g2oj), w2]);
        let hbar = add(h2, g2oj);
        let int = chain(&[&w2h, &hbar, f1, &bf_adj(f1), &bf_adj(&hbar), w2]);
        let noise = chain(&[&w2h, w2]).scale(var);
        tr(&chain(&[&add(&direct, &refl), &inv2(&add(&noise, &int))]))
    }

    fn settings(var: f64) -> MetricSettings<f64> {
        MetricSettings { noise_var: [var, var], se_mode: SeMode::Determinant, noise_model: NoiseModel::Combined }
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let eff = EffectiveChannels {
                ue1: complex_gaussian(&mut rng, 3, 6),
                ue2_direct: complex_gaussian(&mut rng, 3, 6),
                ue2_reflected: Some(complex_gaussian::<f64, _>(&mut rng, 3, 6).scale(0.3)),
            };
            let pre = PrecoderSet {
                f1: complex_gaussian(&mut rng, 6, 2),
                f2: complex_gaussian(&mut rng, 6, 2),
                per_user_power: [1.0, 1.0],
                nulls: vec![],
            };
            let comb = CombinerSet { w1: complex_gaussian(&mut rng, 3, 2), w2: complex_gaussian(&mut rng, 3, 2) };
            let var = 0.1;
            let g1 = sinr_ue1(&eff, &pre, &comb, var, NoiseModel::Combined).unwrap().gamma;
            let g2 = sinr_ue2(&eff, &pre, &comb, var, NoiseModel::Combined).unwrap().gamma;
            let o1 = oracle_gamma1(&eff.ue1, &pre.f1, &pre.f2, &comb.w1, var);
            let o2 = oracle_gamma2(&eff.ue2_direct, eff.ue2_reflected.as_ref().unwrap(), &pre.f1, &pre.f2, &comb.w2, var);
            assert!((g1 - o1).abs() <= 1e-10 * o1.abs(), "{g1} vs {o1}");
            assert!((g2 - o2).abs() <= 1e-10 * o2.abs(), "{g2} vs {o2}");
        }
    }

    #[test]
    fn interference_free_zf_gives_streams_over_noise() {
        // H̄1 F1 has orthonormal columns, so the ZF combiner equals it
        let h1 = CMatrix::<f64>::identity(4).leading_cols(3).adjoint();
        let f1 = CMatrix::<f64>::identity(4).leading_cols(2);
        let pre = PrecoderSet { f1: f1.clone(), f2: CMatrix::zeros(4, 2), per_user_power: [2.0, 0.0], nulls: vec![] };
        let eff = EffectiveChannels::without_irs(&h1, &h1);
        let comb = build_combiners(&eff, &PrecoderSet { f2: f1.clone(), ..pre.clone() }).unwrap();
        let var = 1e-3;
        for model in [NoiseModel::Combined, NoiseModel::Identity] {
            let p = sinr_ue1(&eff, &pre, &comb, var, model).unwrap();
            assert!((p.gamma - 2.0 / var).abs() <= 1e-9 * 2.0 / var);
            assert_eq!(p.interference_power(), 0.0);
        }
        // 4x power at a fixed combiner
        let loud = PrecoderSet { f1: f1.scale(2.0), ..pre };
        let p = sinr_ue1(&eff, &loud, &comb, var, NoiseModel::Combined).unwrap();
        assert!((p.gamma - 8.0 / var).abs() <= 1e-9 * 8.0 / var);
    }

    #[test]
    fn single_user_reduction_for_ue2() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let h2: CMatrix<f64> = complex_gaussian(&mut rng, 8, 32);
        let f2 = bd_precoder(&h2, None, 2, 0.5).unwrap();
        let eff = EffectiveChannels {
            ue1: complex_gaussian(&mut rng, 8, 32),
            ue2_direct: h2.clone(),
            ue2_reflected: Some(CMatrix::zeros(8, 32)),
        };
        let pre = PrecoderSet { f1: CMatrix::zeros(32, 2), f2: f2.clone(), per_user_power: [0.0, 0.5], nulls: vec![] };
        let w2 = crate::matgebra::pseudo_inverse(&(&h2 * &f2)).unwrap().adjoint();
        let comb = CombinerSet { w1: CMatrix::zeros(8, 2), w2 };
        let var = 1e-2;
        let p = sinr_ue2(&eff, &pre, &comb, var, NoiseModel::Combined).unwrap();
        // ZF: Γ = (H2F2)ᴴ(H2F2)/σ²
        let heff = &h2 * &f2;
        let want = heff.norm_fro_sqr() / var;
        assert!((p.gamma - want).abs() <= 1e-9 * want);
        assert_eq!(p.interference_power(), 0.0);
        let se = spectral_efficiency(&p.gamma_matrix, SeMode::Determinant).unwrap();
        let cap = determinant(&(&CMatrix::identity(2) + &heff.adjoint_mul(&heff).unwrap().scale(1.0 / var))).unwrap();
        assert!((se - cap.re.log2()).abs() < 1e-9);
    }

    #[test]
    fn se_examples() {
        let z = CMatrix::<f64>::zeros(2, 2);
        assert_eq!(spectral_efficiency(&z, SeMode::Determinant).unwrap(), 0.0);
        assert_eq!(spectral_efficiency(&z, SeMode::Scalar).unwrap(), 0.0);
        let one = CMatrix::<f64>::identity(2);
        assert!((spectral_efficiency(&one, SeMode::Determinant).unwrap() - 2.0).abs() < 1e-15);
        let r1 = CMatrix::<f64>::diag_real(&[3.0, 0.0]);
        assert!((spectral_efficiency(&r1, SeMode::Determinant).unwrap() - 2.0).abs() < 1e-15);
        assert!((spectral_efficiency(&r1, SeMode::Scalar).unwrap() - 2.0).abs() < 1e-15);
        let bad = CMatrix::diag_real(&[-3.0, 0.0]);
        assert!(matches!(spectral_efficiency(&bad, SeMode::Determinant), Err(MetricsError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn sum_is_additive() {
        assert_eq!(sum_se(0.0, 0.0), 0.0);
        assert!((sum_se(3.2, 1.8) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn swapping_ue_labels_keeps_the_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let a: CMatrix<f64> = complex_gaussian(&mut rng, 8, 32);
        let b: CMatrix<f64> = complex_gaussian(&mut rng, 8, 32);
        let run = |h1: &CMatrix<f64>, h2: &CMatrix<f64>| {
            let eff = EffectiveChannels::without_irs(h1, h2);
            let pre = build_no_irs_benchmark(&eff, 2, 1.0).unwrap();
            let comb = build_combiners(&eff, &pre).unwrap();
            evaluate(&eff, &pre, &comb, &settings(1e-2)).unwrap()
        };
        let ab = run(&a, &b);
        let ba = run(&b, &a);
        assert_eq!(ab.se_sum, ba.se_sum);
        assert_eq!((ab.se1, ab.se2), (ba.se2, ba.se1));
    }

    #[test]
    fn nulled_sinr_grows_with_own_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let h1: CMatrix<f64> = complex_gaussian(&mut rng, 8, 32);
        let h2: CMatrix<f64> = complex_gaussian(&mut rng, 8, 32);
        let eff = EffectiveChannels::without_irs(&h1, &h2);
        let base = build_no_irs_benchmark(&eff, 2, 1.0).unwrap();
        let mut last = 0.0;
        for p in [0.1, 1.0, 10.0, 100.0] {
            let pre = base.rescaled(p).unwrap();
            let comb = build_combiners(&eff, &pre).unwrap();
            let m = evaluate(&eff, &pre, &comb, &settings(1.0)).unwrap();
            assert!(m.gamma1 >= last);
            last = m.gamma1;
        }
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMatrix<f64> {
        let x: CMatrix<f64> = complex_gaussian(rng, n, rank);
        &x * &x.adjoint()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn se_monotone_in_loewner_order(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_psd(&mut rng, n, n);
            let more = &g + &random_psd(&mut rng, n, 1);
            let a = spectral_efficiency(&g, SeMode::Determinant).unwrap();
            let b = spectral_efficiency(&more, SeMode::Determinant).unwrap();
            prop_assert!(b >= a - 1e-12);
        }

        #[test]
        fn modes_agree_on_rank_one(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_psd(&mut rng, n, 1);
            let a = spectral_efficiency(&g, SeMode::Determinant).unwrap();
            let b = spectral_efficiency(&g, SeMode::Scalar).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
