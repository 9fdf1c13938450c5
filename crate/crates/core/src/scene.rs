//! Scene geometry, line-of-sight channels and link parameters.
//!
//! The access point sits at the origin with both uniform linear arrays laid
//! along the y-axis and boresight towards +x. Element `n` sits at
//! `y = n * spacing * wavelength`.
//!
//! Two angle conventions are used:
//!
//! * *steering angle*: counterclockwise from the +x boresight, in `(-pi, pi]`.
//!   This is what [`steering_vector`] takes.
//! * *bearing*: counterclockwise from the -y array axis, so the front
//!   half-plane spans `[0, pi]` with boresight at `pi/2`. The experiments and
//!   the CLI talk in bearings, which puts the point `(5/sqrt 2, 5/sqrt 2)` at
//!   135 degrees. `bearing = steering angle + pi/2`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Complex, DVector};

use crate::error::{Error, Result};
use crate::units::{self, dbm_to_watt};

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    pub carrier_hz: f64,
}

impl ArrayConfig {
    pub const DEFAULT_CARRIER_HZ: f64 = 2.4e9;

    pub fn new(n_tx: usize, n_rx: usize, spacing: f64, carrier_hz: f64) -> Result<Self> {
        if n_tx == 0 || n_rx == 0 {
            return Err(Error::InvalidParameter {
                name: "n_antennas",
                reason: "arrays need at least one element".into(),
            });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "spacing",
                reason: format!("must be positive, got {spacing}"),
            });
        }
        if !(carrier_hz > 0.0 && carrier_hz.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "carrier_hz",
                reason: format!("must be positive, got {carrier_hz}"),
            });
        }
        Ok(Self {
            n_tx,
            n_rx,
            spacing,
            carrier_hz,
        })
    }

    /// Half-wavelength array at 2.4 GHz with as many receive as transmit elements.
    pub fn half_wavelength(n: usize) -> Result<Self> {
        Self::new(n, n, 0.5, Self::DEFAULT_CARRIER_HZ)
    }

    pub fn wavelength(&self) -> f64 {
        units::wavelength(self.carrier_hz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Point at `range` meters along `bearing` (radians from the -y axis).
    pub fn from_bearing(bearing: f64, range: f64) -> Self {
        Self {
            x: range * bearing.sin(),
            y: -range * bearing.cos(),
        }
    }

    pub fn range(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Steering angle from the +x boresight.
    pub fn steering_angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Bearing from the -y axis, in `(-pi/2, 3pi/2]`.
    pub fn bearing(&self) -> f64 {
        self.steering_angle() + FRAC_PI_2
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scene {
    pub array: ArrayConfig,
    pub tag: Position,
    pub user: Position,
}

impl Scene {
    pub fn new(array: ArrayConfig, tag: Position, user: Position) -> Result<Self> {
        for (what, p) in [("tag", tag), ("user", user)] {
            if !p.is_finite() || p.range() <= 0.0 {
                return Err(Error::Domain(format!(
                    "{what} position {p:?} must be finite and away from the access point"
                )));
            }
        }
        if tag.distance_to(&user) <= 0.0 {
            return Err(Error::Domain("tag and user positions coincide".into()));
        }
        Ok(Self { array, tag, user })
    }

    pub fn channels(&self) -> Result<ChannelSet> {
        let lambda = self.array.wavelength();
        Ok(ChannelSet {
            h_t: los_channel(&self.array, self.tag)?,
            h_r: los_receive_channel(&self.array, self.tag)?,
            h_u: los_channel(&self.array, self.user)?,
            h_tu: scalar_channel(self.tag, self.user, lambda)?,
        })
    }
}

/// Linear-unit parameters of the design problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Total transmit power budget, watts.
    pub total_power: f64,
    /// Backscatter modulation efficiency.
    pub eta: f64,
    pub sigma2_tag: f64,
    pub sigma2_reader: f64,
    pub sigma2_user: f64,
    pub gamma_user: f64,
    pub gamma_tag: f64,
    pub gamma_reader: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64); 8] = [
            ("total_power", self.total_power),
            ("eta", self.eta),
            ("sigma2_tag", self.sigma2_tag),
            ("sigma2_reader", self.sigma2_reader),
            ("sigma2_user", self.sigma2_user),
            ("gamma_user", self.gamma_user),
            ("gamma_tag", self.gamma_tag),
            ("gamma_reader", self.gamma_reader),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if self.eta > 1.0 {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("must lie in (0, 1], got {}", self.eta),
            });
        }
        Ok(())
    }

    pub fn with_gamma_user(mut self, gamma_user: f64) -> Self {
        self.gamma_user = gamma_user;
        self
    }
}

/// Engineering-unit description of the link budget, from which
/// [`SystemParams`] are derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub total_power_dbm: f64,
    pub temperature_k: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub tag_sensitivity_dbm: f64,
    pub reader_sensitivity_dbm: f64,
    pub eta: f64,
    pub gamma_user_db: f64,
    /// Overrides the sensitivity-derived tag threshold when set.
    pub gamma_tag_db: Option<f64>,
    /// Overrides the sensitivity-derived reader threshold when set.
    pub gamma_reader_db: Option<f64>,
}

impl Default for LinkBudget {
    /// 30 dBm budget, 270 K, 10 MHz, 7 dB noise figure, -25.5 dBm tag and
    /// -94 dBm reader sensitivity, eta = 0.16, 0 dB user SINR.
    fn default() -> Self {
        Self {
            total_power_dbm: 30.0,
            temperature_k: 270.0,
            bandwidth_hz: 10e6,
            noise_figure_db: 7.0,
            tag_sensitivity_dbm: -25.5,
            reader_sensitivity_dbm: -94.0,
            eta: 0.16,
            gamma_user_db: 0.0,
            gamma_tag_db: None,
            gamma_reader_db: None,
        }
    }
}

impl LinkBudget {
    pub fn noise_variance(&self) -> f64 {
        units::noise_power(self.temperature_k, self.bandwidth_hz, self.noise_figure_db)
    }

    pub fn params(&self) -> Result<SystemParams> {
        for (name, v) in [
            ("temperature_k", self.temperature_k),
            ("bandwidth_hz", self.bandwidth_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        let sigma2 = self.noise_variance();
        let (gamma_tag, gamma_reader) = thresholds_from_sensitivity(
            self.tag_sensitivity_dbm,
            self.reader_sensitivity_dbm,
            sigma2,
            sigma2,
        );
        let params = SystemParams {
            total_power: dbm_to_watt(self.total_power_dbm),
            eta: self.eta,
            sigma2_tag: sigma2,
            sigma2_reader: sigma2,
            sigma2_user: sigma2,
            gamma_user: units::db_to_linear(self.gamma_user_db),
            gamma_tag: self.gamma_tag_db.map_or(gamma_tag, units::db_to_linear),
            gamma_reader: self
                .gamma_reader_db
                .map_or(gamma_reader, units::db_to_linear),
        };
        params.validate()?;
        Ok(params)
    }
}

/// Channels of one scene. `h_t` is the access point to tag channel on the
/// transmit array and `h_r` the tag to access point channel seen by the
/// receive array; by reciprocity they coincide when the arrays do.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h_t: CVector,
    pub h_r: CVector,
    pub h_u: CVector,
    pub h_tu: C64,
}

impl ChannelSet {
    /// Channels with a receive array identical to the transmit array.
    pub fn reciprocal(h_t: CVector, h_u: CVector, h_tu: C64) -> Self {
        Self {
            h_r: h_t.clone(),
            h_t,
            h_u,
            h_tu,
        }
    }

    pub fn n_tx(&self) -> usize {
        self.h_t.len()
    }
}

/// Response of an `n`-element uniform linear array: element `k` is
/// `exp(j 2 pi spacing k sin(angle))`.
pub fn ula_response(n: usize, spacing: f64, angle: f64) -> CVector {
    let step = 2.0 * PI * spacing * angle.sin();
    CVector::from_fn(n, |k, _| C64::from_polar(1.0, step * k as f64))
}

/// Transmit-array steering vector for a steering angle measured from boresight.
pub fn steering_vector(array: &ArrayConfig, angle: f64) -> CVector {
    ula_response(array.n_tx, array.spacing, angle)
}

/// Free-space power gain `(lambda / (4 pi d))^2`.
pub fn friis_gain(distance: f64, wavelength: f64) -> Result<f64> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(Error::Domain(format!(
            "path-loss distance must be positive and finite, got {distance}"
        )));
    }
    Ok((wavelength / (4.0 * PI * distance)).powi(2))
}

fn propagation(distance: f64, wavelength: f64) -> Result<C64> {
    let amplitude = friis_gain(distance, wavelength)?.sqrt();
    Ok(C64::from_polar(
        amplitude,
        -2.0 * PI * distance / wavelength,
    ))
}

fn los(n: usize, array: &ArrayConfig, pos: Position) -> Result<CVector> {
    let lambda = array.wavelength();
    let scale = propagation(pos.range(), lambda)?;
    Ok(ula_response(n, array.spacing, pos.steering_angle()) * scale)
}

/// Far-field line-of-sight channel from the transmit array to `pos`.
pub fn los_channel(array: &ArrayConfig, pos: Position) -> Result<CVector> {
    los(array.n_tx, array, pos)
}

/// Same as [`los_channel`] for the receive array.
pub fn los_receive_channel(array: &ArrayConfig, pos: Position) -> Result<CVector> {
    los(array.n_rx, array, pos)
}

/// Single-antenna to single-antenna line-of-sight channel.
pub fn scalar_channel(a: Position, b: Position, wavelength: f64) -> Result<C64> {
    let d = a.distance_to(&b);
    if d <= 0.0 {
        return Err(Error::Domain(format!("coincident positions {a:?}")));
    }
    propagation(d, wavelength)
}

/// SINR thresholds equivalent to the tag and reader sensitivities: a
/// threshold is met with zero interference exactly when the received power
/// reaches the sensitivity.
pub fn thresholds_from_sensitivity(
    sens_tag_dbm: f64,
    sens_reader_dbm: f64,
    sigma2_tag: f64,
    sigma2_reader: f64,
) -> (f64, f64) {
    (
        dbm_to_watt(sens_tag_dbm) / sigma2_tag,
        dbm_to_watt(sens_reader_dbm) / sigma2_reader,
    )
}
