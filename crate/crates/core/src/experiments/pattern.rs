use std::fmt;

use crate::conic::{ConicProgram, SolverSettings};
use crate::error::Result;
use crate::joint::{assemble_joint, solve_joint, JointStatus, ObjectiveMode, PowerBudget};
use crate::scene::{steering_vector, ArrayConfig, CVector, Position, Scene, SystemParams};
use crate::sinr::{evaluate, BeamPair, Combiner, SinrReport};
use crate::zf::solve_zf;

use super::MethodKind;

/// Gain reported where the array factor vanishes.
pub const PATTERN_FLOOR_DB: f64 = -200.0;

/// Array factor `10 log10 |a(theta)^H f|^2` at each steering angle (radians
/// from boresight), floored at [`PATTERN_FLOOR_DB`].
pub fn beam_pattern(f: &CVector, steering_angles: &[f64], array: &ArrayConfig) -> Vec<f64> {
    steering_angles
        .iter()
        .map(|&theta| {
            let g = steering_vector(array, theta).dotc(f).norm_sqr();
            if g > 0.0 {
                (10.0 * g.log10()).max(PATTERN_FLOOR_DB)
            } else {
                PATTERN_FLOOR_DB
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternPoint {
    /// `"sensing"` or `"communication"`.
    pub beam: &'static str,
    pub bearing_deg: f64,
    pub gain_db: f64,
}

/// Patterns of both beams over a bearing grid, sensing first.
pub fn pattern_sweep(
    beams: &BeamPair,
    bearings_deg: &[f64],
    array: &ArrayConfig,
) -> Vec<PatternPoint> {
    let angles: Vec<f64> = bearings_deg
        .iter()
        .map(|b| b.to_radians() - std::f64::consts::FRAC_PI_2)
        .collect();
    [
        ("sensing", &beams.sensing),
        ("communication", &beams.communication),
    ]
    .into_iter()
    .flat_map(|(beam, f)| {
        beam_pattern(f, &angles, array)
            .into_iter()
            .zip(bearings_deg)
            .map(move |(gain_db, &bearing_deg)| PatternPoint {
                beam,
                bearing_deg,
                gain_db,
            })
    })
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

impl DesignStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DesignStatus::Optimal => "optimal",
            DesignStatus::Infeasible => "infeasible",
            DesignStatus::NumericalFailure => "numerical_failure",
        }
    }
}

/// One solved scene.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub method: MethodKind,
    pub tag: Position,
    pub user: Position,
    pub status: DesignStatus,
    pub beams: Option<BeamPair>,
    pub report: Option<SinrReport>,
    /// `||f_t||^2`, `||f_u||^2` in watts.
    pub sensing_power: f64,
    pub communication_power: f64,
    /// Only for the joint design, when asked for.
    pub program: Option<ConicProgram>,
}

/// Designs the beams of one scene. The joint design minimises the sum of
/// beam norms under the power budget.
pub fn design(
    array: &ArrayConfig,
    tag: Position,
    user: Position,
    method: MethodKind,
    params: &SystemParams,
    solver: &SolverSettings,
    with_program: bool,
) -> Result<DesignResult> {
    let channels = Scene::new(*array, tag, user)?.channels()?;
    let (status, beams, program) = match method {
        MethodKind::ZeroForcing => {
            let z = solve_zf(&channels, params)?;
            if z.allocation.feasible {
                (DesignStatus::Optimal, Some(z.beams()), None)
            } else {
                (DesignStatus::Infeasible, None, None)
            }
        }
        MethodKind::JointSocp => {
            let w = Combiner::matched(&channels.h_r)?;
            let mode = ObjectiveMode::SumOfNorms;
            let program = if with_program {
                Some(assemble_joint(&channels, &w, params, mode)?)
            } else {
                None
            };
            let s = solve_joint(
                &channels,
                &w,
                params,
                mode,
                PowerBudget::Constrained,
                solver,
            )?;
            let status = match s.status {
                JointStatus::Optimal => DesignStatus::Optimal,
                JointStatus::Infeasible => DesignStatus::Infeasible,
                JointStatus::NumericalFailure => DesignStatus::NumericalFailure,
            };
            (status, s.beams, program)
        }
    };
    let report = beams
        .as_ref()
        .map(|b| evaluate(&channels, b, params))
        .transpose()?;
    let (sensing_power, communication_power) = beams
        .as_ref()
        .map_or((0.0, 0.0), |b| (b.sensing_power(), b.communication_power()));
    Ok(DesignResult {
        method,
        tag,
        user,
        status,
        beams,
        report,
        sensing_power,
        communication_power,
        program,
    })
}

fn write_beam(f: &mut fmt::Formatter<'_>, name: &str, v: &CVector) -> fmt::Result {
    write!(f, "{name} =")?;
    for z in v.iter() {
        write!(f, " {:+.9e}{:+.9e}j", z.re, z.im)?;
    }
    writeln!(f)
}

impl fmt::Display for DesignResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method = {}", self.method)?;
        writeln!(
            f,
            "tag = ({:.6}, {:.6}) m, bearing {:.3} deg",
            self.tag.x,
            self.tag.y,
            self.tag.bearing().to_degrees()
        )?;
        writeln!(
            f,
            "user = ({:.6}, {:.6}) m, bearing {:.3} deg",
            self.user.x,
            self.user.y,
            self.user.bearing().to_degrees()
        )?;
        writeln!(f, "status = {}", self.status.as_str())?;
        writeln!(f, "sensing_power_w = {:.9e}", self.sensing_power)?;
        writeln!(
            f,
            "communication_power_w = {:.9e}",
            self.communication_power
        )?;
        if let Some(r) = &self.report {
            writeln!(
                f,
                "sinr_tag_db = {:.6}",
                crate::units::linear_to_db(r.sinr_tag)
            )?;
            writeln!(
                f,
                "sinr_reader_db = {:.6}",
                crate::units::linear_to_db(r.sinr_reader)
            )?;
            writeln!(
                f,
                "sinr_user_db = {:.6}",
                crate::units::linear_to_db(r.sinr_user)
            )?;
        }
        if let Some(b) = &self.beams {
            write_beam(f, "f_t", &b.sensing)?;
            write_beam(f, "f_u", &b.communication)?;
        }
        if let Some(p) = &self.program {
            writeln!(f, "\n{p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::LinkBudget;
    use crate::sinr::BeamPair;

    fn fig_scene() -> (ArrayConfig, Position, Position, SystemParams) {
        (
            ArrayConfig::half_wavelength(8).unwrap(),
            Position::from_bearing(90f64.to_radians(), 6.0),
            Position::from_bearing(135f64.to_radians(), 5.0),
            LinkBudget::default().params().unwrap(),
        )
    }

    fn peak(points: &[PatternPoint], beam: &str) -> (f64, f64) {
        points
            .iter()
            .filter(|p| p.beam == beam)
            .map(|p| (p.gain_db, p.bearing_deg))
            .fold(
                (f64::NEG_INFINITY, 0.0),
                |a, b| if b.0 > a.0 { b } else { a },
            )
    }

    #[test]
    fn matched_beam_peaks_at_its_target() {
        let array = ArrayConfig::half_wavelength(4).unwrap();
        let grid: Vec<f64> = (0..=180).map(f64::from).collect();
        for target in [40.0f64, 90.0, 135.0] {
            let f = steering_vector(&array, target.to_radians() - std::f64::consts::FRAC_PI_2);
            let pts = pattern_sweep(&BeamPair::new(f.clone(), f).unwrap(), &grid, &array);
            let (gain, at) = peak(&pts, "sensing");
            assert_eq!(at, target);
            assert!((gain - 10.0 * 16f64.log10()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_beam_hits_the_floor() {
        let array = ArrayConfig::half_wavelength(4).unwrap();
        let g = beam_pattern(&CVector::zeros(4), &[0.0, 0.3], &array);
        assert_eq!(g, vec![PATTERN_FLOOR_DB; 2]);
    }

    #[test]
    fn zero_forcing_beams_null_the_other_target() {
        let (array, tag, user, params) = fig_scene();
        let d = design(
            &array,
            tag,
            user,
            MethodKind::ZeroForcing,
            &params,
            &SolverSettings::default(),
            false,
        )
        .unwrap();
        let pts = pattern_sweep(d.beams.as_ref().unwrap(), &[90.0, 135.0], &array);
        let grid: Vec<f64> = (0..=360).map(|i| i as f64 * 0.5).collect();
        let full = pattern_sweep(d.beams.as_ref().unwrap(), &grid, &array);
        let (peak_t, _) = peak(&full, "sensing");
        let (peak_u, _) = peak(&full, "communication");
        assert!(
            pts[1].gain_db <= peak_t - 60.0,
            "sensing toward user {}",
            pts[1].gain_db
        );
        assert!(
            pts[2].gain_db <= peak_u - 60.0,
            "communication toward tag {}",
            pts[2].gain_db
        );
    }

    #[test]
    fn joint_design_meets_thresholds_and_dumps() {
        let (array, tag, user, params) = fig_scene();
        let s = SolverSettings::default();
        let j = design(&array, tag, user, MethodKind::JointSocp, &params, &s, true).unwrap();
        let z = design(
            &array,
            tag,
            user,
            MethodKind::ZeroForcing,
            &params,
            &s,
            false,
        )
        .unwrap();
        assert_eq!(j.status, DesignStatus::Optimal);
        assert!(j.report.unwrap().meets(&params, 1e-6));
        let norms = |d: &DesignResult| d.sensing_power.sqrt() + d.communication_power.sqrt();
        assert!(norms(&j) <= norms(&z) * (1.0 + 1e-6));
        let text = j.to_string();
        assert!(
            text.contains("status = optimal")
                && text.contains("f_u =")
                && text.contains("cone user_sinr")
        );
    }
}
