use crate::joint::{min_power_joint, JointStatus};
use crate::scene::{Position, Scene};
use crate::zf::solve_zf;

use super::{Execution, Experiment, MethodKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerStatus {
    Ok,
    Infeasible,
    /// Collinear channels or coincident tag and user.
    Degenerate,
    SolverFailure,
}

impl PowerStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PowerStatus::Ok => "ok",
            PowerStatus::Infeasible => "infeasible",
            PowerStatus::Degenerate => "degenerate",
            PowerStatus::SolverFailure => "solver_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    pub method: MethodKind,
    pub bearing_deg: f64,
    /// Minimum total transmit power in watts; `None` unless `status` is `Ok`.
    pub power: Option<f64>,
    pub status: PowerStatus,
}

fn min_power(
    exp: &Experiment,
    tag: Position,
    user: Position,
    method: MethodKind,
) -> (Option<f64>, PowerStatus) {
    let channels = match Scene::new(exp.array, tag, user).and_then(|s| s.channels()) {
        Ok(c) => c,
        Err(_) => return (None, PowerStatus::Degenerate),
    };
    match method {
        MethodKind::ZeroForcing => match solve_zf(&channels, &exp.params) {
            Ok(z) if z.allocation.feasible => (Some(z.allocation.total()), PowerStatus::Ok),
            Ok(_) => (None, PowerStatus::Infeasible),
            Err(e) => {
                log::warn!("zero-forcing unavailable at tag={tag:?}: {e}");
                (None, PowerStatus::Degenerate)
            }
        },
        MethodKind::JointSocp => match min_power_joint(&channels, &exp.params, &exp.solver) {
            Ok(s) => match s.status {
                JointStatus::Optimal => (Some(s.power), PowerStatus::Ok),
                JointStatus::Infeasible => (None, PowerStatus::Infeasible),
                JointStatus::NumericalFailure => (None, PowerStatus::SolverFailure),
            },
            Err(e) => {
                log::warn!("joint design unavailable at tag={tag:?}: {e}");
                (None, PowerStatus::Degenerate)
            }
        },
    }
}

/// Minimum total power with the tag at `tag_range` on each bearing, methods
/// outermost.
pub fn power_sweep(
    exp: &Experiment,
    bearings_deg: &[f64],
    tag_range: f64,
    user: Position,
    methods: &[MethodKind],
    execution: Execution,
) -> Vec<PowerPoint> {
    let jobs: Vec<(MethodKind, f64)> = methods
        .iter()
        .flat_map(|&m| bearings_deg.iter().map(move |&b| (m, b)))
        .collect();
    execution.map(&jobs, |&(method, bearing_deg)| {
        let tag = Position::from_bearing(bearing_deg.to_radians(), tag_range);
        let (power, status) = min_power(exp, tag, user, method);
        PowerPoint {
            method,
            bearing_deg,
            power,
            status,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{ArrayConfig, LinkBudget};

    fn exp() -> Experiment {
        Experiment::new(
            ArrayConfig::half_wavelength(4).unwrap(),
            LinkBudget::default().params().unwrap(),
        )
        .unwrap()
    }

    fn user() -> Position {
        Position::from_bearing(135f64.to_radians(), 5.0)
    }

    #[test]
    fn far_from_the_user_costs_less_than_the_budget() {
        let exp = exp();
        for p in power_sweep(
            &exp,
            &[30.0],
            6.0,
            user(),
            &MethodKind::ALL,
            Execution::Sequential,
        ) {
            assert_eq!(p.status, PowerStatus::Ok);
            assert!(p.power.unwrap() < exp.params.total_power);
        }
    }

    #[test]
    fn joint_never_needs_more_than_zero_forcing() {
        let exp = exp();
        let bearings: Vec<f64> = (0..=36).map(|i| i as f64 * 5.0).collect();
        let pts = power_sweep(
            &exp,
            &bearings,
            6.0,
            user(),
            &MethodKind::ALL,
            Execution::Sequential,
        );
        let (zf, joint) = pts.split_at(bearings.len());
        for (z, j) in zf.iter().zip(joint) {
            if let (Some(pz), Some(pj)) = (z.power, j.power) {
                assert!(pj <= pz * (1.0 + 1e-6), "{}: {pj} > {pz}", z.bearing_deg);
            }
            if z.status == PowerStatus::Ok {
                assert_eq!(j.status, PowerStatus::Ok);
            }
        }
    }

    #[test]
    fn approaching_the_user_costs_more() {
        let exp = exp();
        let pts = power_sweep(
            &exp,
            &[90.0, 120.0],
            6.0,
            user(),
            &MethodKind::ALL,
            Execution::Sequential,
        );
        for pair in pts.chunks(2) {
            let (a, b) = (
                pair[0].power.unwrap(),
                pair[1].power.unwrap_or(f64::INFINITY),
            );
            assert!(b >= a * (1.0 - 1e-6), "{}: {b} < {a}", pair[0].method);
        }
    }
}
