//! Link SINRs of the tag, the reader and the user for a given beam pair.
//!
//! All three are expectation-form ratios: the sensing symbol, user symbol and
//! tag data all have unit average energy, so symbol statistics drop out and
//! nothing here is Monte-Carlo.

use crate::error::{Error, Result};
use crate::scene::{CVector, ChannelSet, SystemParams, C64};

/// Sensing beam `f_t` and communication beam `f_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPair {
    pub sensing: CVector,
    pub communication: CVector,
}

impl BeamPair {
    pub fn new(sensing: CVector, communication: CVector) -> Result<Self> {
        if sensing.len() != communication.len() {
            return Err(Error::Dimension {
                expected: sensing.len(),
                found: communication.len(),
            });
        }
        Ok(Self {
            sensing,
            communication,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            sensing: CVector::zeros(n),
            communication: CVector::zeros(n),
        }
    }

    pub fn n_tx(&self) -> usize {
        self.sensing.len()
    }

    pub fn sensing_power(&self) -> f64 {
        self.sensing.norm_squared()
    }

    pub fn communication_power(&self) -> f64 {
        self.communication.norm_squared()
    }

    pub fn total_power(&self) -> f64 {
        self.sensing_power() + self.communication_power()
    }
}

/// Unit-norm receive combiner at the access point.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    w: CVector,
}

impl Combiner {
    /// Matched combiner `w = h / ||h||`.
    pub fn matched(h_r: &CVector) -> Result<Self> {
        let n = h_r.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain(
                "cannot build a combiner from a zero channel".into(),
            ));
        }
        Ok(Self { w: h_r.unscale(n) })
    }

    /// The same combiner times `exp(j phase)`.
    pub fn rotated(&self, phase: f64) -> Self {
        Self {
            w: &self.w * C64::from_polar(1.0, phase),
        }
    }

    pub fn weights(&self) -> &CVector {
        &self.w
    }

    /// `w^H h`.
    pub fn response(&self, h: &CVector) -> C64 {
        self.w.dotc(h)
    }
}

pub fn combiner(h_r: &CVector) -> Result<Combiner> {
    Combiner::matched(h_r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrReport {
    pub sinr_tag: f64,
    pub sinr_reader: f64,
    pub sinr_user: f64,
    /// `||f_t||^2 + ||f_u||^2`.
    pub power_tx: f64,
}

impl SinrReport {
    /// Largest relative shortfall of the three SINRs below their thresholds,
    /// zero when all are met.
    pub fn worst_violation(&self, params: &SystemParams) -> f64 {
        [
            (self.sinr_tag, params.gamma_tag),
            (self.sinr_reader, params.gamma_reader),
            (self.sinr_user, params.gamma_user),
        ]
        .into_iter()
        .map(|(s, g)| ((g - s) / g).max(0.0))
        .fold(0.0, f64::max)
    }

    pub fn meets(&self, params: &SystemParams, rel_slack: f64) -> bool {
        self.worst_violation(params) <= rel_slack
            && self.power_tx <= params.total_power * (1.0 + rel_slack)
    }
}

fn gain(h: &CVector, f: &CVector) -> f64 {
    h.dotc(f).norm_sqr()
}

/// `|h_t^H f_t|^2 / (|h_t^H f_u|^2 + sigma_t^2)`.
pub fn sinr_tag(beams: &BeamPair, h_t: &CVector, sigma2_tag: f64) -> f64 {
    gain(h_t, &beams.sensing) / (gain(h_t, &beams.communication) + sigma2_tag)
}

/// SINR of the backscattered signal after combining at the access point.
///
/// With `g = |w^H h_r|^2`:
/// `eta g |h_t^H f_t|^2 / (eta g |h_t^H f_u|^2 + eta sigma_t^2 g + sigma_r^2)`.
pub fn sinr_reader(
    beams: &BeamPair,
    h_t: &CVector,
    h_r: &CVector,
    w: &Combiner,
    eta: f64,
    sigma2_tag: f64,
    sigma2_reader: f64,
) -> f64 {
    let g = eta * w.response(h_r).norm_sqr();
    g * gain(h_t, &beams.sensing)
        / (g * gain(h_t, &beams.communication) + g * sigma2_tag + sigma2_reader)
}

/// User SINR, including the tag's re-radiation of both beams and of its own
/// noise as interference.
pub fn sinr_user(
    beams: &BeamPair,
    h_u: &CVector,
    h_t: &CVector,
    h_tu: C64,
    eta: f64,
    sigma2_tag: f64,
    sigma2_user: f64,
) -> f64 {
    let backscatter = eta
        * h_tu.norm_sqr()
        * (gain(h_t, &beams.sensing) + gain(h_t, &beams.communication) + sigma2_tag);
    gain(h_u, &beams.communication) / (gain(h_u, &beams.sensing) + backscatter + sigma2_user)
}

pub fn evaluate(
    channels: &ChannelSet,
    beams: &BeamPair,
    params: &SystemParams,
) -> Result<SinrReport> {
    let n = channels.n_tx();
    for len in [
        beams.sensing.len(),
        beams.communication.len(),
        channels.h_u.len(),
    ] {
        if len != n {
            return Err(Error::Dimension {
                expected: n,
                found: len,
            });
        }
    }
    let w = combiner(&channels.h_r)?;
    Ok(SinrReport {
        sinr_tag: sinr_tag(beams, &channels.h_t, params.sigma2_tag),
        sinr_reader: sinr_reader(
            beams,
            &channels.h_t,
            &channels.h_r,
            &w,
            params.eta,
            params.sigma2_tag,
            params.sigma2_reader,
        ),
        sinr_user: sinr_user(
            beams,
            &channels.h_u,
            &channels.h_t,
            channels.h_tu,
            params.eta,
            params.sigma2_tag,
            params.sigma2_user,
        ),
        power_tx: beams.total_power(),
    })
}
