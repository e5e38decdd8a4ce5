//! Geometric Rician channel synthesis with ULA/URA steering vectors.
//!
//! A link matrix is the sum of a deterministic LOS term along the geometric
//! bearing and `S` equal-power NLOS rays with random angles:
//!
//! ```text
//! H = √(K/(K+1)) A₀ a_r(los) a_tᵀ(los) + √(1/(K+1)) (1/√S) Σ_s A_s a_r(s) a_tᵀ(s)
//! ```
//!
//! with `|A₀|² = E|A_s|² = 10^(−(PL+shadow)/10)`, so `E‖H‖²_F = gain·rows·cols`
//! for every K.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matgebra::CMatrix;
use crate::scalar::{cis, Cx, Real};
use crate::scene::{draw_large_scale, Direction, GeometryError, Link, LinkLargeScale, LosAngles, NodeGeometry};

/// Element spacing in wavelengths.
pub const ELEMENT_SPACING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArraySpec {
    /// Horizontal uniform linear array; elevation is ignored.
    Ula { elements: usize },
    /// Uniform rectangular array; rows follow elevation, columns azimuth.
    Ura { rows: usize, cols: usize },
}

impl ArraySpec {
    pub fn elements(&self) -> usize {
        match *self {
            ArraySpec::Ula { elements } => elements,
            ArraySpec::Ura { rows, cols } => rows * cols,
        }
    }

    /// Most-square URA holding `n` elements (`rows ≤ cols`).
    pub fn square_ura(n: usize) -> Self {
        let rows = (1..=n).take_while(|r| r * r <= n).filter(|r| n.is_multiple_of(*r)).last().unwrap_or(1);
        ArraySpec::Ura { rows, cols: n / rows }
    }

    fn uses_elevation(&self) -> bool {
        matches!(self, ArraySpec::Ura { .. })
    }
}

/// Array response towards `(azimuth, elevation)`.
///
/// ULA entry `m` is `exp(j·2π·d·m·sin az)`. URA entries are stacked
/// column-major, entry `(r, c)` at index `c·rows + r` with phase
/// `2π·d·(c·sin az·cos el + r·sin el)`.
pub fn steering_vector<T: Real>(array: ArraySpec, azimuth: f64, elevation: f64) -> Vec<Cx<T>> {
    let k = 2.0 * PI * ELEMENT_SPACING;
    match array {
        ArraySpec::Ula { elements } => {
            let step = k * azimuth.sin();
            (0..elements).map(|m| cis(T::lit(step * m as f64))).collect()
        }
        ArraySpec::Ura { rows, cols } => {
            let col_step = k * azimuth.sin() * elevation.cos();
            let row_step = k * elevation.sin();
            let mut out = Vec::with_capacity(rows * cols);
            for c in 0..cols {
                for r in 0..rows {
                    out.push(cis(T::lit(col_step * c as f64 + row_step * r as f64)));
                }
            }
            out
        }
    }
}

/// Adds `coef · a_r a_tᵀ` into `h` (transpose, no conjugation).
fn add_outer<T: Real>(h: &mut CMatrix<T>, coef: Cx<T>, a_r: &[Cx<T>], a_t: &[Cx<T>]) {
    for (c, &t) in a_t.iter().enumerate() {
        let ct = coef * t;
        for (dst, &r) in h.col_mut(c).iter_mut().zip(a_r) {
            *dst = *dst + r * ct;
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> f64 {
    rng.gen_range(-half_width..half_width)
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R, array: ArraySpec) -> Direction {
    let azimuth = uniform(rng, FRAC_PI_2);
    let elevation = if array.uses_elevation() { uniform(rng, FRAC_PI_4) } else { 0.0 };
    Direction { azimuth, elevation }
}

/// One realization of a `rx.elements() × tx.elements()` link matrix.
///
/// Draw order from `rng`: LOS phase; then per ray the arrival azimuth
/// (and elevation for a URA receiver), the departure azimuth (and elevation
/// for a URA transmitter), and the real and imaginary parts of the ray gain.
pub fn synthesize_channel<T: Real, R: Rng + ?Sized>(
    tx: ArraySpec,
    rx: ArraySpec,
    ls: &LinkLargeScale,
    los: &LosAngles,
    rays: usize,
    rng: &mut R,
) -> CMatrix<T> {
    let rays = rays.max(1);
    let amp = ls.gain_linear().sqrt();
    let k = ls.k_factor_linear;
    let (w_los, w_nlos) = if k.is_infinite() { (1.0, 0.0) } else { ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt()) };

    let mut h = CMatrix::zeros(rx.elements(), tx.elements());

    let los_phase: f64 = rng.gen_range(0.0..2.0 * PI);
    let a_r = steering_vector(rx, los.arrival.azimuth, los.arrival.elevation);
    let a_t = steering_vector(tx, los.departure.azimuth, los.departure.elevation);
    add_outer(&mut h, cis(T::lit(los_phase)) * T::lit(w_los * amp), &a_r, &a_t);

    let ray_scale = w_nlos * amp * (0.5 / rays as f64).sqrt();
    for _ in 0..rays {
        let arr = random_direction(rng, rx);
        let dep = random_direction(rng, tx);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let a_r = steering_vector(rx, arr.azimuth, arr.elevation);
        let a_t = steering_vector(tx, dep.azimuth, dep.elevation);
        add_outer(&mut h, Complex::new(T::lit(re * ray_scale), T::lit(im * ray_scale)), &a_r, &a_t);
    }
    h
}

/// Array sizes and propagation settings shared by all links of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// M
    pub bs_antennas: usize,
    /// N, laid out as `irs_array`
    pub irs_array: ArraySpec,
    /// Q
    pub ue1_antennas: usize,
    /// P
    pub ue2_antennas: usize,
    pub fc_ghz: f64,
    pub rays: usize,
}

impl ChannelParams {
    pub fn bs(&self) -> ArraySpec {
        ArraySpec::Ula { elements: self.bs_antennas }
    }

    pub fn ue1(&self) -> ArraySpec {
        ArraySpec::Ula { elements: self.ue1_antennas }
    }

    pub fn ue2(&self) -> ArraySpec {
        ArraySpec::Ula { elements: self.ue2_antennas }
    }

    fn arrays(&self, link: Link) -> (ArraySpec, ArraySpec) {
        match link {
            Link::BsIrs => (self.bs(), self.irs_array),
            Link::BsUe2 => (self.bs(), self.ue2()),
            Link::IrsUe1 => (self.irs_array, self.ue1()),
            Link::IrsUe2 => (self.irs_array, self.ue2()),
            Link::BsUe1 => (self.bs(), self.ue1()),
        }
    }
}

/// Large-scale terms per link, held fixed across realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenLargeScale {
    pub j: LinkLargeScale,
    pub h2: LinkLargeScale,
    pub g1: LinkLargeScale,
    pub g2: LinkLargeScale,
    pub h1_direct: LinkLargeScale,
}

impl FrozenLargeScale {
    /// Draws all five links in the order J, H2, G1, G2, direct UE1.
    pub fn draw<R: Rng + ?Sized>(params: &ChannelParams, geom: &NodeGeometry, rng: &mut R) -> Result<Self, GeometryError> {
        let fc = params.fc_ghz;
        Ok(Self {
            j: draw_large_scale(geom, Link::BsIrs, fc, rng)?,
            h2: draw_large_scale(geom, Link::BsUe2, fc, rng)?,
            g1: draw_large_scale(geom, Link::IrsUe1, fc, rng)?,
            g2: draw_large_scale(geom, Link::IrsUe2, fc, rng)?,
            h1_direct: draw_large_scale(geom, Link::BsUe1, fc, rng)?,
        })
    }

    fn get(&self, link: Link) -> LinkLargeScale {
        match link {
            Link::BsIrs => self.j,
            Link::BsUe2 => self.h2,
            Link::IrsUe1 => self.g1,
            Link::IrsUe2 => self.g2,
            Link::BsUe1 => self.h1_direct,
        }
    }
}

/// One realization of the four scenario channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T: Real> {
    /// BS → IRS, N×M
    pub j: CMatrix<T>,
    /// BS → UE2, P×M
    pub h2: CMatrix<T>,
    /// IRS → UE1, Q×N
    pub g1: CMatrix<T>,
    /// IRS → UE2, P×N
    pub g2: CMatrix<T>,
}

/// Draws the large-scale terms (unless frozen) then the small-scale matrix of
/// one link.
pub fn draw_link<T: Real, R: Rng + ?Sized>(
    params: &ChannelParams,
    geom: &NodeGeometry,
    link: Link,
    frozen: Option<&FrozenLargeScale>,
    rng: &mut R,
) -> Result<CMatrix<T>, GeometryError> {
    let ls = match frozen {
        Some(f) => f.get(link),
        None => draw_large_scale(geom, link, params.fc_ghz, rng)?,
    };
    let (tx, rx) = params.arrays(link);
    Ok(synthesize_channel(tx, rx, &ls, &geom.los_angles(link), params.rays, rng))
}

/// Draws J, H2, G1, G2 in that order.
pub fn draw_channel_set<T: Real, R: Rng + ?Sized>(
    params: &ChannelParams,
    geom: &NodeGeometry,
    frozen: Option<&FrozenLargeScale>,
    rng: &mut R,
) -> Result<ChannelSet<T>, GeometryError> {
    Ok(ChannelSet {
        j: draw_link(params, geom, Link::BsIrs, frozen, rng)?,
        h2: draw_link(params, geom, Link::BsUe2, frozen, rng)?,
        g1: draw_link(params, geom, Link::IrsUe1, frozen, rng)?,
        g2: draw_link(params, geom, Link::IrsUe2, frozen, rng)?,
    })
}

/// Substitute BS → UE1 channel (Q×M) for the no-IRS benchmark.
pub fn draw_direct_ue1<T: Real, R: Rng + ?Sized>(
    params: &ChannelParams,
    geom: &NodeGeometry,
    frozen: Option<&FrozenLargeScale>,
    rng: &mut R,
) -> Result<CMatrix<T>, GeometryError> {
    draw_link(params, geom, Link::BsUe1, frozen, rng)
}
