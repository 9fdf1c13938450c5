//! Reference computations shared by the integration tests. Nothing here
//! calls into the allocation, SOCP or search code it is used to check.

#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use backscatter_isac::scene::{
    ArrayConfig, CVector, ChannelSet, LinkBudget, Position, SystemParams, C64,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn reference_params() -> SystemParams {
    LinkBudget::default().params().unwrap()
}

pub fn reference_user() -> Position {
    Position::new(5.0 * FRAC_1_SQRT_2, 5.0 * FRAC_1_SQRT_2)
}

pub fn array(n: usize) -> ArrayConfig {
    ArrayConfig::half_wavelength(n).unwrap()
}

/// Tag-limited no-user range: `N (lambda / 4 pi d)^2 P = sensitivity`.
pub fn closed_form_upper_bound(n: usize, total_power: f64, tag_sensitivity_w: f64) -> f64 {
    let lambda = 299_792_458.0 / 2.4e9;
    lambda / (4.0 * PI) * (n as f64 * total_power / tag_sensitivity_w).sqrt()
}

/// Scalar link gains of two fixed beam directions, computed directly.
#[derive(Debug, Clone, Copy)]
pub struct Gains {
    pub tt: f64,
    pub tu: f64,
    pub uu: f64,
    pub ut: f64,
    pub backscatter: f64,
    pub reader: f64,
}

impl Gains {
    pub fn new(ch: &ChannelSet, f_t: &CVector, f_u: &CVector) -> Self {
        let inner = |h: &CVector, f: &CVector| -> f64 {
            h.iter()
                .zip(f.iter())
                .map(|(a, b)| a.conj() * b)
                .sum::<C64>()
                .norm_sqr()
        };
        let w = ch.h_r.unscale(ch.h_r.norm());
        Self {
            tt: inner(&ch.h_t, f_t),
            tu: inner(&ch.h_t, f_u),
            uu: inner(&ch.h_u, f_u),
            ut: inner(&ch.h_u, f_t),
            backscatter: ch.h_tu.norm_sqr(),
            reader: inner(&w, &ch.h_r),
        }
    }

    /// All three SINR constraints and the budget at powers `(pt, pu)`.
    pub fn feasible(&self, p: &SystemParams, pt: f64, pu: f64) -> bool {
        let st = pt * self.tt / (pu * self.tu + p.sigma2_tag);
        let eg = p.eta * self.reader;
        let sr = eg * pt * self.tt / (eg * pu * self.tu + eg * p.sigma2_tag + p.sigma2_reader);
        let su = pu * self.uu
            / (pt * self.ut
                + p.eta * self.backscatter * (pt * self.tt + pu * self.tu + p.sigma2_tag)
                + p.sigma2_user);
        pt + pu <= p.total_power && st >= p.gamma_tag && sr >= p.gamma_reader && su >= p.gamma_user
    }
}

/// Cheapest lattice point of `[0, P]^2` with `cells + 1` points per side.
pub fn grid_min_power(g: &Gains, p: &SystemParams, cells: usize) -> Option<(f64, f64)> {
    let step = p.total_power / cells as f64;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=cells {
        let pt = i as f64 * step;
        // for fixed p_t the cost grows with p_u, so the first feasible p_u wins
        for j in 0..=cells - i {
            let pu = j as f64 * step;
            if best.is_some_and(|(a, b)| pt + pu >= a + b) {
                break;
            }
            if g.feasible(p, pt, pu) {
                best = Some((pt, pu));
                break;
            }
        }
    }
    best
}

/// A random scene with tag and user in front of the array, at least 1 m apart
/// and 3 degrees apart in bearing.
pub fn random_scene(rng: &mut ChaCha8Rng) -> (ArrayConfig, Position, Position) {
    let n = [2usize, 4, 8][rng.random_range(0..3)];
    loop {
        let tag = Position::from_bearing(
            rng.random_range(5f64..175.0).to_radians(),
            rng.random_range(1.0..10.0),
        );
        let user = Position::from_bearing(
            rng.random_range(5f64..175.0).to_radians(),
            rng.random_range(1.0..20.0),
        );
        if tag.distance_to(&user) > 1.0
            && (tag.bearing() - user.bearing()).abs() > 3f64.to_radians()
        {
            return (array(n), tag, user);
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|h^H f| / ||h||`.
pub fn leakage(h: &CVector, f: &CVector) -> f64 {
    h.iter()
        .zip(f.iter())
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        .norm()
        / h.norm()
}
