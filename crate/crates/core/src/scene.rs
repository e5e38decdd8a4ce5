//! Node placement and large-scale fading (UMa pathloss, shadowing, Rician K).

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::scalar::Real;

/// Shadow-fading standard deviation, dB.
pub const SHADOW_STD_DB: f64 = 4.0;
/// Rician K-factor mean and standard deviation, dB.
pub const K_FACTOR_MEAN_DB: f64 = 9.0;
pub const K_FACTOR_STD_DB: f64 = 3.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{node} cannot be placed: distances {d_bs:.3} m (BS), {d_irs:.3} m (IRS) and {d_bs_irs:.3} m (BS-IRS) violate the triangle inequality")]
    Triangle { node: &'static str, d_bs: f64, d_irs: f64, d_bs_irs: f64 },
    #[error("{what} must be positive and finite, got {value}")]
    Domain { what: &'static str, value: f64 },
}

/// Heights and horizontal distances that pin the four nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub height_bs_m: f64,
    pub height_irs_m: f64,
    pub height_ue_m: f64,
    pub d2d_bs_irs_m: f64,
    pub d2d_bs_ue1_m: f64,
    pub d2d_bs_ue2_m: f64,
    pub d2d_irs_ue1_m: f64,
    pub d2d_irs_ue2_m: f64,
}

impl Default for Layout {
    fn default() -> Self {
        Self {
            height_bs_m: 25.0,
            height_irs_m: 8.0,
            height_ue_m: 1.5,
            d2d_bs_irs_m: 100.0,
            d2d_bs_ue1_m: 100.0,
            d2d_bs_ue2_m: 100.0,
            d2d_irs_ue1_m: 51.7,
            d2d_irs_ue2_m: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Bs,
    Irs,
    Ue1,
    Ue2,
}

/// Directed propagation links, transmitter first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    BsIrs,
    BsUe2,
    IrsUe1,
    IrsUe2,
    /// Hypothetical direct link used by the no-IRS benchmark.
    BsUe1,
}

impl Link {
    pub fn endpoints(self) -> (Node, Node) {
        match self {
            Link::BsIrs => (Node::Bs, Node::Irs),
            Link::BsUe2 => (Node::Bs, Node::Ue2),
            Link::IrsUe1 => (Node::Irs, Node::Ue1),
            Link::IrsUe2 => (Node::Irs, Node::Ue2),
            Link::BsUe1 => (Node::Bs, Node::Ue1),
        }
    }
}

/// Fixed node positions in metres. The BS sits at the horizontal origin and
/// the IRS on the +x axis; UEs take the +y solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGeometry {
    pub bs: [f64; 3],
    pub irs: [f64; 3],
    pub ue1: [f64; 3],
    pub ue2: [f64; 3],
}

/// Azimuth/elevation pair in radians, in a node's local array frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosAngles {
    pub departure: Direction,
    pub arrival: Direction,
}

fn positive(what: &'static str, value: f64) -> Result<f64, GeometryError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(GeometryError::Domain { what, value })
    }
}

fn non_negative(what: &'static str, value: f64) -> Result<f64, GeometryError> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(GeometryError::Domain { what, value })
    }
}

/// Horizontal position at `d_bs` from the origin and `d_irs` from `(d_bs_irs, 0)`.
fn circle_intersection(node: &'static str, d_bs: f64, d_irs: f64, d_bs_irs: f64) -> Result<[f64; 2], GeometryError> {
    let slack = 1e-9 * (d_bs + d_irs + d_bs_irs);
    if d_bs_irs > d_bs + d_irs + slack || d_bs > d_bs_irs + d_irs + slack || d_irs > d_bs + d_bs_irs + slack {
        return Err(GeometryError::Triangle { node, d_bs, d_irs, d_bs_irs });
    }
    let x = (d_bs * d_bs + d_bs_irs * d_bs_irs - d_irs * d_irs) / (2.0 * d_bs_irs);
    let y = (d_bs * d_bs - x * x).max(0.0).sqrt();
    Ok([x, y])
}

pub fn build_geometry(layout: &Layout) -> Result<NodeGeometry, GeometryError> {
    let d_bi = positive("d2dBsIrsM", layout.d2d_bs_irs_m)?;
    let d_bu1 = non_negative("d2dBsUe1M", layout.d2d_bs_ue1_m)?;
    let d_bu2 = non_negative("d2dBsUe2M", layout.d2d_bs_ue2_m)?;
    let d_iu1 = non_negative("d2dIrsUe1M", layout.d2d_irs_ue1_m)?;
    let d_iu2 = non_negative("d2dIrsUe2M", layout.d2d_irs_ue2_m)?;
    let h_bs = non_negative("heightBsM", layout.height_bs_m)?;
    let h_irs = non_negative("heightIrsM", layout.height_irs_m)?;
    let h_ue = non_negative("heightUeM", layout.height_ue_m)?;

    let [x1, y1] = circle_intersection("UE1", d_bu1, d_iu1, d_bi)?;
    let [x2, y2] = circle_intersection("UE2", d_bu2, d_iu2, d_bi)?;
    Ok(NodeGeometry {
        bs: [0.0, 0.0, h_bs],
        irs: [d_bi, 0.0, h_irs],
        ue1: [x1, y1, h_ue],
        ue2: [x2, y2, h_ue],
    })
}

impl NodeGeometry {
    pub fn position(&self, node: Node) -> [f64; 3] {
        match node {
            Node::Bs => self.bs,
            Node::Irs => self.irs,
            Node::Ue1 => self.ue1,
            Node::Ue2 => self.ue2,
        }
    }

    pub fn distance_3d(&self, a: Node, b: Node) -> f64 {
        let (p, q) = (self.position(a), self.position(b));
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
    }

    pub fn distance_2d(&self, a: Node, b: Node) -> f64 {
        let (p, q) = (self.position(a), self.position(b));
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    /// Nodes an array faces; its broadside points at their horizontal centroid.
    fn partners(node: Node) -> &'static [Node] {
        match node {
            Node::Bs => &[Node::Irs, Node::Ue2],
            Node::Irs => &[Node::Bs, Node::Ue1, Node::Ue2],
            Node::Ue1 => &[Node::Irs],
            Node::Ue2 => &[Node::Bs, Node::Irs],
        }
    }

    fn broadside_heading(&self, node: Node) -> f64 {
        let me = self.position(node);
        let (mut sx, mut sy) = (0.0, 0.0);
        for &p in Self::partners(node) {
            let q = self.position(p);
            let d = (q[0] - me[0]).hypot(q[1] - me[1]).max(f64::MIN_POSITIVE);
            sx += (q[0] - me[0]) / d;
            sy += (q[1] - me[1]) / d;
        }
        if sx == 0.0 && sy == 0.0 {
            0.0
        } else {
            sy.atan2(sx)
        }
    }

    /// Direction of `to` as seen from the array at `from`.
    pub fn direction(&self, from: Node, to: Node) -> Direction {
        let (p, q) = (self.position(from), self.position(to));
        let (dx, dy, dz) = (q[0] - p[0], q[1] - p[1], q[2] - p[2]);
        let mut az = dy.atan2(dx) - self.broadside_heading(from);
        az = (az + PI).rem_euclid(2.0 * PI) - PI;
        // planar arrays cannot tell front from back
        if az > PI / 2.0 {
            az = PI - az;
        } else if az < -PI / 2.0 {
            az = -PI - az;
        }
        Direction { azimuth: az, elevation: dz.atan2(dx.hypot(dy)) }
    }

    pub fn los_angles(&self, link: Link) -> LosAngles {
        let (tx, rx) = link.endpoints();
        LosAngles { departure: self.direction(tx, rx), arrival: self.direction(rx, tx) }
    }
}

/// UMa pathloss `28 + 22·log10(d3D) + 20·log10(fc)` with `fc` in GHz.
pub fn pathloss_db<T: Real>(d3d_m: T, fc_ghz: T) -> Result<T, GeometryError> {
    let ok = |x: T| x > T::zero() && x.is_finite();
    if !ok(d3d_m) {
        return Err(GeometryError::Domain { what: "d3D", value: d3d_m.to_f64_lossy() });
    }
    if !ok(fc_ghz) {
        return Err(GeometryError::Domain { what: "fcGHz", value: fc_ghz.to_f64_lossy() });
    }
    Ok(T::lit(28.0) + T::lit(22.0) * d3d_m.log10() + T::lit(20.0) * fc_ghz.log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkLargeScale {
    pub pathloss_db: f64,
    pub shadow_db: f64,
    pub k_factor_linear: f64,
}

impl LinkLargeScale {
    /// Linear power gain `10^(−(PL + shadow)/10)`.
    pub fn gain_linear(&self) -> f64 {
        10f64.powf(-(self.pathloss_db + self.shadow_db) / 10.0)
    }

    pub fn k_factor_db(&self) -> f64 {
        10.0 * self.k_factor_linear.log10()
    }

    /// Maps two standard-normal variates onto shadowing and K-factor.
    pub fn from_normals(pathloss_db: f64, z_shadow: f64, z_k: f64) -> Self {
        let k_db = K_FACTOR_MEAN_DB + K_FACTOR_STD_DB * z_k;
        Self {
            pathloss_db,
            shadow_db: SHADOW_STD_DB * z_shadow,
            k_factor_linear: 10f64.powf(k_db / 10.0),
        }
    }
}

/// Draws the large-scale terms of one link. Consumes exactly two standard
/// normals from `rng`: shadowing first, then K-factor.
pub fn draw_large_scale<R: Rng + ?Sized>(
    geom: &NodeGeometry,
    link: Link,
    fc_ghz: f64,
    rng: &mut R,
) -> Result<LinkLargeScale, GeometryError> {
    let (tx, rx) = link.endpoints();
    let pl = pathloss_db(geom.distance_3d(tx, rx), fc_ghz)?;
    let z_shadow: f64 = rng.sample(StandardNormal);
    let z_k: f64 = rng.sample(StandardNormal);
    Ok(LinkLargeScale::from_normals(pl, z_shadow, z_k))
}
