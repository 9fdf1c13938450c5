//! Zero-forcing beam directions followed by an exact two-variable power
//! allocation.
//!
//! The directions are the normalized columns of `H (H^H H)^-1` with
//! `H = [h_t, h_u]`: the sensing beam is nulled at the user and the
//! communication beam at the tag. With directions fixed, every SINR
//! constraint is a half-plane in `(p_t, p_u)` and minimizing `p_t + p_u` is a
//! two-dimensional LP, solved here by enumerating vertices.

use crate::error::{Error, Result};
use crate::scene::{CVector, ChannelSet, SystemParams, C64};
use crate::sinr::{combiner, BeamPair};

/// Gram matrices with a condition number above this are rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct ZfDirections {
    pub sensing: CVector,
    pub communication: CVector,
    /// Condition number of `H^H H`.
    pub condition: f64,
}

/// Eigenvalue ratio of the Hermitian matrix `[[a, b], [conj(b), c]]`.
fn gram_condition(a: f64, b: C64, c: f64) -> f64 {
    let det = a * c - b.norm_sqr();
    if det <= 0.0 {
        return f64::INFINITY;
    }
    let half = 0.5 * (a + c);
    let big = half + (0.25 * (a - c).powi(2) + b.norm_sqr()).sqrt();
    big * big / det
}

pub fn zf_directions(h_t: &CVector, h_u: &CVector) -> Result<ZfDirections> {
    if h_t.len() != h_u.len() {
        return Err(Error::Dimension {
            expected: h_t.len(),
            found: h_u.len(),
        });
    }
    let a = h_t.norm_squared();
    let c = h_u.norm_squared();
    let b = h_t.dotc(h_u);
    let condition = gram_condition(a, b, c);
    if !(condition <= MAX_GRAM_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    // Columns of H adj(H^H H); the 1/det factor disappears in the normalization.
    let f_t = h_t * C64::from(c) - h_u * b.conj();
    let f_u = h_u * C64::from(a) - h_t * b;
    Ok(ZfDirections {
        sensing: f_t.unscale(f_t.norm()),
        communication: f_u.unscale(f_u.norm()),
        condition,
    })
}

/// Squared link gains seen by a pair of unit-norm beam directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    /// `|h_t^H f_t|^2`
    pub tag_sensing: f64,
    /// `|h_t^H f_u|^2`
    pub tag_communication: f64,
    /// `|h_u^H f_u|^2`
    pub user_communication: f64,
    /// `|h_u^H f_t|^2`
    pub user_sensing: f64,
    /// `|h_tu|^2`
    pub tag_user: f64,
    /// `|w^H h_r|^2` of the receive combiner.
    pub reader: f64,
}

impl LinkGains {
    pub fn new(channels: &ChannelSet, sensing: &CVector, communication: &CVector) -> Result<Self> {
        let w = combiner(&channels.h_r)?;
        Ok(Self {
            tag_sensing: channels.h_t.dotc(sensing).norm_sqr(),
            tag_communication: channels.h_t.dotc(communication).norm_sqr(),
            user_communication: channels.h_u.dotc(communication).norm_sqr(),
            user_sensing: channels.h_u.dotc(sensing).norm_sqr(),
            tag_user: channels.h_tu.norm_sqr(),
            reader: w.response(&channels.h_r).norm_sqr(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub p_t: f64,
    pub p_u: f64,
    pub feasible: bool,
}

impl PowerAllocation {
    pub const INFEASIBLE: Self = Self {
        p_t: 0.0,
        p_u: 0.0,
        feasible: false,
    };

    pub fn total(&self) -> f64 {
        self.p_t + self.p_u
    }
}

/// `a * p_t + b * p_u >= c`.
#[derive(Debug, Clone, Copy)]
struct HalfPlane {
    a: f64,
    b: f64,
    c: f64,
}

impl HalfPlane {
    fn slack(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y - self.c
    }

    fn holds(&self, x: f64, y: f64) -> bool {
        let scale = (self.a * x).abs() + (self.b * y).abs() + self.c.abs();
        self.slack(x, y) >= -1e-12 * scale
    }
}

/// The six half-planes bounding the allocation polygon: tag, reader and
/// user SINR, the power cap, and nonnegativity of each power.
fn half_planes(g: &LinkGains, p: &SystemParams) -> [HalfPlane; 6] {
    let backscatter = p.eta * g.tag_user;
    let reader = p.eta * g.reader;
    [
        HalfPlane {
            a: g.tag_sensing,
            b: -p.gamma_tag * g.tag_communication,
            c: p.gamma_tag * p.sigma2_tag,
        },
        HalfPlane {
            a: reader * g.tag_sensing,
            b: -p.gamma_reader * reader * g.tag_communication,
            c: p.gamma_reader * (reader * p.sigma2_tag + p.sigma2_reader),
        },
        HalfPlane {
            a: -p.gamma_user * (g.user_sensing + backscatter * g.tag_sensing),
            b: g.user_communication - p.gamma_user * backscatter * g.tag_communication,
            c: p.gamma_user * (backscatter * p.sigma2_tag + p.sigma2_user),
        },
        HalfPlane {
            a: -1.0,
            b: -1.0,
            c: -p.total_power,
        },
        HalfPlane {
            a: 1.0,
            b: 0.0,
            c: 0.0,
        },
        HalfPlane {
            a: 0.0,
            b: 1.0,
            c: 0.0,
        },
    ]
}

/// Minimum-total-power allocation for fixed beam directions.
///
/// Every pairwise intersection of constraint boundaries is a candidate
/// vertex; the cheapest one satisfying all constraints is optimal. Ties go
/// to the vertex with more communication power.
pub fn power_allocation(gains: &LinkGains, params: &SystemParams) -> PowerAllocation {
    let planes = half_planes(gains, params);
    let mut best: Option<(f64, f64)> = None;
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let (l1, l2) = (planes[i], planes[j]);
            let det = l1.a * l2.b - l1.b * l2.a;
            if det == 0.0 {
                continue;
            }
            let x = (l1.c * l2.b - l1.b * l2.c) / det;
            let y = (l1.a * l2.c - l1.c * l2.a) / det;
            if !(x.is_finite() && y.is_finite()) || !planes.iter().all(|h| h.holds(x, y)) {
                continue;
            }
            let (x, y) = (x.max(0.0), y.max(0.0));
            best = match best {
                None => Some((x, y)),
                Some((bx, by)) => {
                    let (s, bs) = (x + y, bx + by);
                    let tie = (s - bs).abs() <= 1e-12 * bs.max(s);
                    if (tie && y > by) || (!tie && s < bs) {
                        Some((x, y))
                    } else {
                        Some((bx, by))
                    }
                }
            };
        }
    }
    match best {
        Some((p_t, p_u)) => PowerAllocation {
            p_t,
            p_u,
            feasible: true,
        },
        None => PowerAllocation::INFEASIBLE,
    }
}

/// Outcome of the zero-forcing pipeline on one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfSolution {
    pub directions: ZfDirections,
    pub gains: LinkGains,
    pub allocation: PowerAllocation,
}

impl ZfSolution {
    /// `sqrt(p_t) f_t`, `sqrt(p_u) f_u`; zero beams when infeasible.
    pub fn beams(&self) -> BeamPair {
        if !self.allocation.feasible {
            return BeamPair::zeros(self.directions.sensing.len());
        }
        BeamPair {
            sensing: &self.directions.sensing * C64::from(self.allocation.p_t.sqrt()),
            communication: &self.directions.communication * C64::from(self.allocation.p_u.sqrt()),
        }
    }

    /// `||f_t|| + ||f_u||` of the allocated beams.
    pub fn sum_of_norms(&self) -> f64 {
        self.allocation.p_t.sqrt() + self.allocation.p_u.sqrt()
    }
}

pub fn solve_zf(channels: &ChannelSet, params: &SystemParams) -> Result<ZfSolution> {
    let directions = zf_directions(&channels.h_t, &channels.h_u)?;
    let gains = LinkGains::new(channels, &directions.sensing, &directions.communication)?;
    let allocation = power_allocation(&gains, params);
    Ok(ZfSolution {
        directions,
        gains,
        allocation,
    })
}
