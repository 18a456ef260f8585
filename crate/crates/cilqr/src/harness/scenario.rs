//! Scenario file format: human-readable key-value text with sections.
//!
//! Units in files are meters, seconds, m/s, and degrees for angle keys ending
//! in `_deg`; keys ending in `_rad` are taken verbatim. [`write_scenario`]
//! emits `_rad` keys so a written scenario reloads bit-identically.

use std::fmt;
use std::path::Path;

use nalgebra::Point2;

use crate::constraints::ObstaclePrediction;
use crate::cost::CostWeights;
use crate::geometry::{OrientedBox, Polyline};
use crate::types::{normalize_angle, LineSearchKind, SolverConfig, VehicleSpec, VehicleState};

#[derive(Debug)]
pub enum ScenarioError {
    Io(std::io::Error),
    Parse { line: usize, message: String },
    Invalid { field: String, message: String },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "scenario I/O error: {e}"),
            Self::Parse { line, message } => {
                write!(f, "scenario parse error, line {line}: {message}")
            }
            Self::Invalid { field, message } => {
                write!(f, "invalid scenario field '{field}': {message}")
            }
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<std::io::Error> for ScenarioError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

/// One lane: centerline plus left/right boundaries with crossability flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub centerline: Polyline,
    pub width: f64,
    pub left: Polyline,
    pub right: Polyline,
}

/// Obstacle pose keyframe. Interpolated linearly; extrapolated linearly past
/// the ends (a single keyframe means a static obstacle).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

/// Scripted obstacle: a box following pose keyframes.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleScript {
    pub name: String,
    pub length: f64,
    pub width: f64,
    pub keyframes: Vec<Keyframe>,
}

impl ObstacleScript {
    pub fn pose_at(&self, t: f64) -> (Point2<f64>, f64) {
        let kf = &self.keyframes;
        if kf.len() == 1 {
            return (Point2::new(kf[0].x, kf[0].y), kf[0].heading);
        }
        // Pick the segment whose span contains t, clamping to the first or
        // last segment for extrapolation.
        let mut i = 0;
        while i + 2 < kf.len() && t > kf[i + 1].t {
            i += 1;
        }
        let (a, b) = (&kf[i], &kf[i + 1]);
        let s = (t - a.t) / (b.t - a.t);
        (
            Point2::new(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)),
            a.heading + s * (b.heading - a.heading),
        )
    }

    /// Boxes at `t0 + k dt` for k = 0..=n.
    pub fn prediction(&self, t0: f64, n: usize, dt: f64) -> ObstaclePrediction {
        let boxes = (0..=n)
            .map(|k| {
                let (center, heading) = self.pose_at(t0 + k as f64 * dt);
                OrientedBox::new(center, heading, self.length, self.width)
            })
            .collect();
        ObstaclePrediction {
            label: self.name.clone(),
            boxes,
        }
    }
}

/// Distance limits for the hard and soft clearance terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub collision_d_min: f64,
    pub boundary_d_min: f64,
    pub boundary_d_soft: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            collision_d_min: 0.3,
            boundary_d_min: 0.2,
            boundary_d_soft: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub dt: f64,
    pub horizon: usize,
    pub target_speed: f64,
    /// Suggested receding-horizon cycle count for this scenario.
    pub default_cycles: usize,
    pub vehicle: VehicleSpec,
    pub solver: SolverConfig,
    pub weights: CostWeights,
    pub limits: Limits,
    pub initial_state: VehicleState,
    pub lanes: Vec<Lane>,
    pub obstacles: Vec<ObstacleScript>,
}

impl Scenario {
    /// All lane boundaries, in deterministic order.
    pub fn boundaries(&self) -> Vec<&Polyline> {
        self.lanes
            .iter()
            .flat_map(|l| [&l.left, &l.right])
            .collect()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive and finite"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be >= 1"));
        }
        if !(self.target_speed.is_finite()) {
            return Err(invalid("target_speed", "must be finite"));
        }
        self.vehicle
            .validate()
            .map_err(|e| invalid(format!("vehicle.{}", e.field), e.message))?;
        self.solver
            .validate()
            .map_err(|e| invalid(format!("solver.{}", e.field), e.message))?;
        let w = &self.weights;
        for (name, value) in [
            ("accel", w.accel),
            ("curvature", w.curvature),
            ("velocity", w.velocity),
            ("reference", w.reference),
            ("lateral_accel", w.lateral_accel),
            ("lateral_jerk", w.lateral_jerk),
            ("longitudinal_jerk", w.longitudinal_jerk),
            ("direction", w.direction),
            ("boundary_soft", w.boundary_soft),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(invalid(
                    format!("weights.{name}"),
                    "must be >= 0 and finite",
                ));
            }
        }
        if self.limits.collision_d_min.is_nan() || self.limits.collision_d_min < 0.0 {
            return Err(invalid("limits.collision_d_min", "must be >= 0"));
        }
        if self.limits.boundary_d_min.is_nan() || self.limits.boundary_d_min < 0.0 {
            return Err(invalid("limits.boundary_d_min", "must be >= 0"));
        }
        if self.limits.boundary_d_soft < self.limits.boundary_d_min {
            return Err(invalid(
                "limits.boundary_d_soft",
                "must be >= boundary_d_min",
            ));
        }
        if !self.initial_state.is_finite() {
            return Err(invalid("initial_state", "must be finite"));
        }
        if self.lanes.is_empty() {
            return Err(invalid("lane", "at least one lane is required"));
        }

        // Initial position must sit within the map extents (lane points
        // inflated by 50 m).
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for lane in &self.lanes {
            for line in [&lane.centerline, &lane.left, &lane.right] {
                for p in &line.points {
                    min.x = min.x.min(p.x);
                    min.y = min.y.min(p.y);
                    max.x = max.x.max(p.x);
                    max.y = max.y.max(p.y);
                }
            }
        }
        let margin = 50.0;
        let (x, y) = (self.initial_state.x, self.initial_state.y);
        if x < min.x - margin || x > max.x + margin || y < min.y - margin || y > max.y + margin {
            return Err(invalid("initial_state", "outside map extents"));
        }

        for (i, obstacle) in self.obstacles.iter().enumerate() {
            if obstacle.keyframes.is_empty() {
                return Err(invalid(
                    format!("obstacle[{i}].keyframes"),
                    "must not be empty",
                ));
            }
            if !(obstacle.length > 0.0 && obstacle.width > 0.0) {
                return Err(invalid(
                    format!("obstacle[{i}]"),
                    "length and width must be > 0",
                ));
            }
            if obstacle.keyframes.windows(2).any(|w| !(w[1].t > w[0].t)) {
                return Err(invalid(
                    format!("obstacle[{i}].keyframes"),
                    "times must be strictly increasing",
                ));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Default)]
struct LaneBuilder {
    width: Option<f64>,
    centerline: Option<Vec<Point2<f64>>>,
    left: Option<Vec<Point2<f64>>>,
    left_crossable: Option<bool>,
    right: Option<Vec<Point2<f64>>>,
    right_crossable: Option<bool>,
}

#[derive(Default)]
struct ObstacleBuilder {
    name: Option<String>,
    length: Option<f64>,
    width: Option<f64>,
    keyframes: Option<Vec<Keyframe>>,
}

fn parse_f64(value: &str, line: usize) -> Result<f64, ScenarioError> {
    value.trim().parse().map_err(|_| ScenarioError::Parse {
        line,
        message: format!("expected a number, got '{value}'"),
    })
}

fn parse_usize(value: &str, line: usize) -> Result<usize, ScenarioError> {
    value.trim().parse().map_err(|_| ScenarioError::Parse {
        line,
        message: format!("expected a nonnegative integer, got '{value}'"),
    })
}

fn parse_bool(value: &str, line: usize) -> Result<bool, ScenarioError> {
    match value.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ScenarioError::Parse {
            line,
            message: format!("expected true or false, got '{other}'"),
        }),
    }
}

fn parse_points(value: &str, line: usize) -> Result<Vec<Point2<f64>>, ScenarioError> {
    value
        .split(';')
        .map(|pair| {
            let coords: Vec<&str> = pair.split(',').collect();
            if coords.len() != 2 {
                return Err(ScenarioError::Parse {
                    line,
                    message: format!("expected 'x,y' pairs separated by ';', got '{pair}'"),
                });
            }
            Ok(Point2::new(
                parse_f64(coords[0], line)?,
                parse_f64(coords[1], line)?,
            ))
        })
        .collect()
}

fn parse_keyframes(
    value: &str,
    line: usize,
    degrees: bool,
) -> Result<Vec<Keyframe>, ScenarioError> {
    value
        .split(';')
        .map(|quad| {
            let parts: Vec<&str> = quad.split(',').collect();
            if parts.len() != 4 {
                return Err(ScenarioError::Parse {
                    line,
                    message: format!(
                        "expected 't,x,y,heading' quadruples separated by ';', got '{quad}'"
                    ),
                });
            }
            let heading = parse_f64(parts[3], line)?;
            Ok(Keyframe {
                t: parse_f64(parts[0], line)?,
                x: parse_f64(parts[1], line)?,
                y: parse_f64(parts[2], line)?,
                heading: if degrees {
                    heading.to_radians()
                } else {
                    heading
                },
            })
        })
        .collect()
}

fn finish_lane(builder: LaneBuilder) -> Result<Lane, ScenarioError> {
    let width = builder
        .width
        .ok_or_else(|| invalid("lane.width", "missing"))?;
    let centerline = builder
        .centerline
        .ok_or_else(|| invalid("lane.centerline", "missing"))?;
    let left = builder
        .left
        .ok_or_else(|| invalid("lane.left_boundary", "missing"))?;
    let right = builder
        .right
        .ok_or_else(|| invalid("lane.right_boundary", "missing"))?;
    let to_poly = |points: Vec<Point2<f64>>, crossable: bool, what: &str| {
        Polyline::new(points, crossable).map_err(|e| invalid(format!("lane.{what}"), e.to_string()))
    };
    Ok(Lane {
        centerline: to_poly(centerline, true, "centerline")?,
        width,
        left: to_poly(
            left,
            builder.left_crossable.unwrap_or(false),
            "left_boundary",
        )?,
        right: to_poly(
            right,
            builder.right_crossable.unwrap_or(false),
            "right_boundary",
        )?,
    })
}

fn finish_obstacle(
    builder: ObstacleBuilder,
    index: usize,
) -> Result<ObstacleScript, ScenarioError> {
    Ok(ObstacleScript {
        name: builder.name.unwrap_or_else(|| format!("obstacle_{index}")),
        length: builder
            .length
            .ok_or_else(|| invalid(format!("obstacle[{index}].length"), "missing"))?,
        width: builder
            .width
            .ok_or_else(|| invalid(format!("obstacle[{index}].width"), "missing"))?,
        keyframes: builder
            .keyframes
            .ok_or_else(|| invalid(format!("obstacle[{index}].keyframes"), "missing"))?,
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        Top,
        Vehicle,
        Solver,
        Weights,
        Limits,
        InitialState,
        Lane,
        Obstacle,
    }

    let mut name = String::from("scenario");
    let mut dt = 0.1;
    let mut horizon = 50;
    let mut target_speed = f64::NAN;
    let mut default_cycles = 1;
    let mut vehicle = VehicleSpec::default();
    let mut solver = SolverConfig::default();
    let mut weights = CostWeights::default();
    let mut limits = Limits::default();
    let mut initial = VehicleState::zeros();
    let mut lanes: Vec<Lane> = Vec::new();
    let mut obstacles: Vec<ObstacleScript> = Vec::new();

    let mut section = Section::Top;
    let mut lane_builder: Option<LaneBuilder> = None;
    let mut obstacle_builder: Option<ObstacleBuilder> = None;

    let flush = |lane_builder: &mut Option<LaneBuilder>,
                 obstacle_builder: &mut Option<ObstacleBuilder>,
                 lanes: &mut Vec<Lane>,
                 obstacles: &mut Vec<ObstacleScript>|
     -> Result<(), ScenarioError> {
        if let Some(builder) = lane_builder.take() {
            lanes.push(finish_lane(builder)?);
        }
        if let Some(builder) = obstacle_builder.take() {
            let index = obstacles.len();
            obstacles.push(finish_obstacle(builder, index)?);
        }
        Ok(())
    };

    for (line_index, raw) in text.lines().enumerate() {
        let line_no = line_index + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(header) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            flush(
                &mut lane_builder,
                &mut obstacle_builder,
                &mut lanes,
                &mut obstacles,
            )?;
            section = match header.trim() {
                "vehicle" => Section::Vehicle,
                "solver" => Section::Solver,
                "weights" => Section::Weights,
                "limits" => Section::Limits,
                "initial_state" => Section::InitialState,
                "lane" => {
                    lane_builder = Some(LaneBuilder::default());
                    Section::Lane
                }
                "obstacle" => {
                    obstacle_builder = Some(ObstacleBuilder::default());
                    Section::Obstacle
                }
                other => {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: format!("unknown section '[{other}]'"),
                    })
                }
            };
            continue;
        }

        let (key, value) = line.split_once('=').ok_or_else(|| ScenarioError::Parse {
            line: line_no,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim();
        let value = value.trim();

        match section {
            Section::Top => match key {
                "name" => name = value.to_string(),
                "dt" => dt = parse_f64(value, line_no)?,
                "horizon" => horizon = parse_usize(value, line_no)?,
                "target_speed" => target_speed = parse_f64(value, line_no)?,
                "cycles" => default_cycles = parse_usize(value, line_no)?,
                other => {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: format!("unknown top-level key '{other}'"),
                    })
                }
            },
            Section::Vehicle => match key {
                "length" => vehicle.length = parse_f64(value, line_no)?,
                "width" => vehicle.width = parse_f64(value, line_no)?,
                "wheelbase" => vehicle.wheelbase = parse_f64(value, line_no)?,
                "steer_ratio" => vehicle.steer_ratio = parse_f64(value, line_no)?,
                "max_accel" => vehicle.max_accel = parse_f64(value, line_no)?,
                "max_decel" => vehicle.max_decel = parse_f64(value, line_no)?,
                "max_steer_angle_deg" => {
                    vehicle.max_steer_angle = parse_f64(value, line_no)?.to_radians()
                }
                "max_steer_angle_rad" => vehicle.max_steer_angle = parse_f64(value, line_no)?,
                "max_steer_rate_deg" => {
                    vehicle.max_steer_rate = parse_f64(value, line_no)?.to_radians()
                }
                "max_steer_rate_rad" => vehicle.max_steer_rate = parse_f64(value, line_no)?,
                "max_steer_accel_deg" => {
                    vehicle.max_steer_accel = parse_f64(value, line_no)?.to_radians()
                }
                "max_steer_accel_rad" => vehicle.max_steer_accel = parse_f64(value, line_no)?,
                "box_ref_offset" => vehicle.box_ref_offset = parse_f64(value, line_no)?,
                other => {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: format!("unknown vehicle key '{other}'"),
                    })
                }
            },
            Section::Solver => match key {
                "barrier_t" => solver.barrier_t = parse_f64(value, line_no)?,
                "barrier_k" => solver.barrier_k = parse_usize(value, line_no)? as u32,
                "epsilon_kinematic" => solver.epsilon.kinematic = parse_f64(value, line_no)?,
                "epsilon_lane_boundary" => {
                    solver.epsilon.lane_boundary = parse_f64(value, line_no)?
                }
                "epsilon_collision" => solver.epsilon.collision = parse_f64(value, line_no)?,
                "regularization" => solver.regularization = parse_f64(value, line_no)?,
                "convergence_rel_tol" => solver.convergence_rel_tol = parse_f64(value, line_no)?,
                "max_iterations" => solver.max_iterations = parse_usize(value, line_no)?,
                "line_search" => {
                    solver.line_search = match value {
                        "golden" | "golden_section" => LineSearchKind::GoldenSection,
                        "backtracking" => LineSearchKind::Backtracking,
                        other => {
                            return Err(ScenarioError::Parse {
                                line: line_no,
                                message: format!(
                                    "line_search must be 'golden' or 'backtracking', got '{other}'"
                                ),
                            })
                        }
                    }
                }
                "backtracking_ratio" => solver.backtracking_ratio = parse_f64(value, line_no)?,
                other => {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: format!("unknown solver key '{other}'"),
                    })
                }
            },
            Section::Weights => match key {
                "accel" => weights.accel = parse_f64(value, line_no)?,
                "curvature" => weights.curvature = parse_f64(value, line_no)?,
                "velocity" => weights.velocity = parse_f64(value, line_no)?,
                "reference" => weights.reference = parse_f64(value, line_no)?,
                "lateral_accel" => weights.lateral_accel = parse_f64(value, line_no)?,
                "lateral_jerk" => weights.lateral_jerk = parse_f64(value, line_no)?,
                "longitudinal_jerk" => weights.longitudinal_jerk = parse_f64(value, line_no)?,
                "direction" => weights.direction = parse_f64(value, line_no)?,
                "boundary_soft" => weights.boundary_soft = parse_f64(value, line_no)?,
                other => {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: format!("unknown weight '{other}'"),
                    })
                }
            },
            Section::Limits => match key {
                "collision_d_min" => limits.collision_d_min = parse_f64(value, line_no)?,
                "boundary_d_min" => limits.boundary_d_min = parse_f64(value, line_no)?,
                "boundary_d_soft" => limits.boundary_d_soft = parse_f64(value, line_no)?,
                other => {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: format!("unknown limit '{other}'"),
                    })
                }
            },
            Section::InitialState => match key {
                "x" => initial.x = parse_f64(value, line_no)?,
                "y" => initial.y = parse_f64(value, line_no)?,
                "v" => initial.v = parse_f64(value, line_no)?,
                "theta_deg" => {
                    initial.theta = normalize_angle(parse_f64(value, line_no)?.to_radians())
                }
                "theta_rad" => initial.theta = normalize_angle(parse_f64(value, line_no)?),
                "a" => initial.a = parse_f64(value, line_no)?,
                "kappa" => initial.kappa = parse_f64(value, line_no)?,
                "kappa_dot" => initial.kappa_dot = parse_f64(value, line_no)?,
                other => {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: format!("unknown initial_state key '{other}'"),
                    })
                }
            },
            Section::Lane => {
                let builder = lane_builder.as_mut().expect("lane section active");
                match key {
                    "width" => builder.width = Some(parse_f64(value, line_no)?),
                    "centerline" => builder.centerline = Some(parse_points(value, line_no)?),
                    "left_boundary" => builder.left = Some(parse_points(value, line_no)?),
                    "left_crossable" => builder.left_crossable = Some(parse_bool(value, line_no)?),
                    "right_boundary" => builder.right = Some(parse_points(value, line_no)?),
                    "right_crossable" => {
                        builder.right_crossable = Some(parse_bool(value, line_no)?)
                    }
                    other => {
                        return Err(ScenarioError::Parse {
                            line: line_no,
                            message: format!("unknown lane key '{other}'"),
                        })
                    }
                }
            }
            Section::Obstacle => {
                let builder = obstacle_builder.as_mut().expect("obstacle section active");
                match key {
                    "name" => builder.name = Some(value.to_string()),
                    "length" => builder.length = Some(parse_f64(value, line_no)?),
                    "width" => builder.width = Some(parse_f64(value, line_no)?),
                    "keyframes_deg" => {
                        builder.keyframes = Some(parse_keyframes(value, line_no, true)?)
                    }
                    "keyframes_rad" => {
                        builder.keyframes = Some(parse_keyframes(value, line_no, false)?)
                    }
                    other => {
                        return Err(ScenarioError::Parse {
                            line: line_no,
                            message: format!("unknown obstacle key '{other}'"),
                        })
                    }
                }
            }
        }
    }
    flush(
        &mut lane_builder,
        &mut obstacle_builder,
        &mut lanes,
        &mut obstacles,
    )?;

    if target_speed.is_nan() {
        target_speed = initial.v;
    }

    let scenario = Scenario {
        name,
        dt,
        horizon,
        target_speed,
        default_cycles,
        vehicle,
        solver,
        weights,
        limits,
        initial_state: initial,
        lanes,
        obstacles,
    };
    scenario.validate()?;
    Ok(scenario)
}

// ---------------------------------------------------------------------------
// Writing

fn points_to_string(line: &Polyline) -> String {
    line.points
        .iter()
        .map(|p| format!("{},{}", p.x, p.y))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn write_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let mut push = |text: String| {
        out.push_str(&text);
        out.push('\n');
    };
    push(format!("name = {}", s.name));
    push(format!("dt = {}", s.dt));
    push(format!("horizon = {}", s.horizon));
    push(format!("target_speed = {}", s.target_speed));
    push(format!("cycles = {}", s.default_cycles));

    push("\n[vehicle]".to_string());
    push(format!("length = {}", s.vehicle.length));
    push(format!("width = {}", s.vehicle.width));
    push(format!("wheelbase = {}", s.vehicle.wheelbase));
    push(format!("steer_ratio = {}", s.vehicle.steer_ratio));
    push(format!("max_accel = {}", s.vehicle.max_accel));
    push(format!("max_decel = {}", s.vehicle.max_decel));
    push(format!(
        "max_steer_angle_rad = {}",
        s.vehicle.max_steer_angle
    ));
    push(format!("max_steer_rate_rad = {}", s.vehicle.max_steer_rate));
    push(format!(
        "max_steer_accel_rad = {}",
        s.vehicle.max_steer_accel
    ));
    push(format!("box_ref_offset = {}", s.vehicle.box_ref_offset));

    push("\n[solver]".to_string());
    push(format!("barrier_t = {}", s.solver.barrier_t));
    push(format!("barrier_k = {}", s.solver.barrier_k));
    push(format!(
        "epsilon_kinematic = {}",
        s.solver.epsilon.kinematic
    ));
    push(format!(
        "epsilon_lane_boundary = {}",
        s.solver.epsilon.lane_boundary
    ));
    push(format!(
        "epsilon_collision = {}",
        s.solver.epsilon.collision
    ));
    push(format!("regularization = {}", s.solver.regularization));
    push(format!(
        "convergence_rel_tol = {}",
        s.solver.convergence_rel_tol
    ));
    push(format!("max_iterations = {}", s.solver.max_iterations));
    push(format!(
        "line_search = {}",
        match s.solver.line_search {
            LineSearchKind::GoldenSection => "golden",
            LineSearchKind::Backtracking => "backtracking",
        }
    ));
    push(format!(
        "backtracking_ratio = {}",
        s.solver.backtracking_ratio
    ));

    push("\n[weights]".to_string());
    push(format!("accel = {}", s.weights.accel));
    push(format!("curvature = {}", s.weights.curvature));
    push(format!("velocity = {}", s.weights.velocity));
    push(format!("reference = {}", s.weights.reference));
    push(format!("lateral_accel = {}", s.weights.lateral_accel));
    push(format!("lateral_jerk = {}", s.weights.lateral_jerk));
    push(format!(
        "longitudinal_jerk = {}",
        s.weights.longitudinal_jerk
    ));
    push(format!("direction = {}", s.weights.direction));
    push(format!("boundary_soft = {}", s.weights.boundary_soft));

    push("\n[limits]".to_string());
    push(format!("collision_d_min = {}", s.limits.collision_d_min));
    push(format!("boundary_d_min = {}", s.limits.boundary_d_min));
    push(format!("boundary_d_soft = {}", s.limits.boundary_d_soft));

    push("\n[initial_state]".to_string());
    push(format!("x = {}", s.initial_state.x));
    push(format!("y = {}", s.initial_state.y));
    push(format!("v = {}", s.initial_state.v));
    push(format!("theta_rad = {}", s.initial_state.theta));
    push(format!("a = {}", s.initial_state.a));
    push(format!("kappa = {}", s.initial_state.kappa));
    push(format!("kappa_dot = {}", s.initial_state.kappa_dot));

    for lane in &s.lanes {
        push("\n[lane]".to_string());
        push(format!("width = {}", lane.width));
        push(format!(
            "centerline = {}",
            points_to_string(&lane.centerline)
        ));
        push(format!("left_boundary = {}", points_to_string(&lane.left)));
        push(format!("left_crossable = {}", lane.left.crossable));
        push(format!(
            "right_boundary = {}",
            points_to_string(&lane.right)
        ));
        push(format!("right_crossable = {}", lane.right.crossable));
    }

    for obstacle in &s.obstacles {
        push("\n[obstacle]".to_string());
        push(format!("name = {}", obstacle.name));
        push(format!("length = {}", obstacle.length));
        push(format!("width = {}", obstacle.width));
        let quads = obstacle
            .keyframes
            .iter()
            .map(|k| format!("{},{},{},{}", k.t, k.x, k.y, k.heading))
            .collect::<Vec<_>>()
            .join("; ");
        push(format!("keyframes_rad = {quads}"));
    }

    out
}
