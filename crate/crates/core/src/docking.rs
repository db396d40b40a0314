//! Kinematic docking and undocking of UAV pairs, coupled to the connector's
//! link budget.
//!
//! UAVs are point kinematics with velocity-setpoint commands. Each candidate
//! pair runs the phase machine
//!
//! ```text
//! Separated -> Approaching -> Capturing -> Docked -> Undocking -> Separated
//! ```
//!
//! Capture fires when the connector gap closes below the magnetic capture
//! radius at a speed under the capture limit; the alignment brackets then
//! funnel the lateral misalignment to zero as the remaining gap closes.
//! Docked pairs move as one rigid body (relative positions frozen to machine
//! precision) until a separation command starts the undock. The RF path is
//! continuous exactly while Docked.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connector::misalignment_s12;
use crate::units::Frequency;

#[derive(Debug, Error)]
pub enum DockingError {
    #[error("time step {0} s outside (0, 0.1]")]
    BadTimeStep(f64),
    #[error("scenario references undefined UAV id {0}")]
    UnknownUav(usize),
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("illegal phase transition {from:?} -> {to:?}")]
    IllegalTransition { from: DockPhase, to: DockPhase },
}

/// Phase of one docking pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DockPhase {
    Separated,
    Approaching,
    Capturing,
    Docked,
    Undocking,
}

impl DockPhase {
    /// Legal next phases.
    pub fn legal_next(&self) -> &'static [DockPhase] {
        match self {
            DockPhase::Separated => &[DockPhase::Approaching],
            DockPhase::Approaching => &[DockPhase::Capturing, DockPhase::Separated],
            DockPhase::Capturing => &[DockPhase::Docked],
            DockPhase::Docked => &[DockPhase::Undocking],
            DockPhase::Undocking => &[DockPhase::Separated],
        }
    }
}

/// Kinematic state of one UAV.
#[derive(Debug, Clone)]
pub struct UavKinematicState {
    pub id: usize,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub max_speed: f64,
    pub docked_to: Option<usize>,
}

/// Mechanical/RF state of one pair's connector link.
#[derive(Debug, Clone, Copy)]
pub struct LinkState {
    /// Connector gap along the docking axis (m).
    pub gap: f64,
    /// Lateral misalignment (m).
    pub d_mis: f64,
    /// Connector transmission when a path exists (dB).
    pub s12_db: f64,
    pub rf_path_continuous: bool,
}

/// Capture-rule parameters; scenario data, not constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CaptureParams {
    /// Magnetic capture radius (m).
    pub capture_radius: f64,
    /// Maximum closing speed at capture (m/s).
    pub capture_speed_limit: f64,
    /// Range at which a closing pair counts as approaching (m).
    pub approach_range: f64,
    /// Relative separation speed that starts an undock (m/s).
    pub separation_threshold: f64,
}

impl Default for CaptureParams {
    fn default() -> Self {
        Self {
            capture_radius: 0.02,
            capture_speed_limit: 0.5,
            approach_range: 0.5,
            separation_threshold: 0.05,
        }
    }
}

/// One docking pair and its live state.
#[derive(Debug, Clone)]
pub struct PairState {
    pub a: usize,
    pub b: usize,
    pub phase: DockPhase,
    pub link: LinkState,
    capture_entry_gap: f64,
    capture_entry_dmis: f64,
    capture_speed: f64,
    /// b's position relative to a while docked; keeps the rigid distance
    /// exact to the last bit.
    rigid_offset: [f64; 3],
}

/// World state stepped by the simulator.
#[derive(Debug, Clone)]
pub struct World {
    pub time: f64,
    pub uavs: Vec<UavKinematicState>,
    pub pairs: Vec<PairState>,
    pub params: CaptureParams,
    /// Docked centre-to-centre distance along the array axis (m).
    pub dock_distance: f64,
    pub frequency: Frequency,
    /// Positional jitter while flying (m, per axis); applied as common-mode
    /// motion to docked groups so rigid distances stay exact.
    pub jitter_sigma: f64,
    rng: ChaCha8Rng,
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    /// UAV ids involved ("a:b" for pair events).
    pub uavs: String,
    pub kind: String,
    pub payload: String,
}

impl Event {
    /// Stable single-line record: timestamp, uav ids, event type, payload.
    pub fn to_line(&self) -> String {
        format!("{:.3}\t{}\t{}\t{}", self.time, self.uavs, self.kind, self.payload)
    }
}

/// Velocity setpoint for one UAV at one step.
pub type Commands = BTreeMap<usize, [f64; 3]>;

impl World {
    pub fn new(
        uavs: Vec<UavKinematicState>,
        pairs: Vec<(usize, usize)>,
        params: CaptureParams,
        dock_distance: f64,
        frequency: Frequency,
        jitter_sigma: f64,
        seed: u64,
    ) -> Result<Self, DockingError> {
        let n = uavs.len();
        for &(a, b) in &pairs {
            if a >= n || b >= n {
                return Err(DockingError::UnknownUav(a.max(b)));
            }
        }
        let pairs = pairs
            .into_iter()
            .map(|(a, b)| PairState {
                a,
                b,
                phase: DockPhase::Separated,
                link: LinkState {
                    gap: f64::INFINITY,
                    d_mis: 0.0,
                    s12_db: f64::NEG_INFINITY,
                    rf_path_continuous: false,
                },
                capture_entry_gap: 0.0,
                capture_entry_dmis: 0.0,
                capture_speed: 0.0,
                rigid_offset: [0.0; 3],
            })
            .collect();
        Ok(Self {
            time: 0.0,
            uavs,
            pairs,
            params,
            dock_distance,
            frequency,
            jitter_sigma,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn pair_geometry(&self, a: usize, b: usize) -> (f64, f64, f64) {
        let pa = &self.uavs[a].position;
        let pb = &self.uavs[b].position;
        let axial = (pb[1] - pa[1]).abs();
        let gap = axial - self.dock_distance;
        let d_mis = ((pb[0] - pa[0]).powi(2) + (pb[2] - pa[2]).powi(2)).sqrt();
        // closing speed along the docking axis, positive when closing
        let rel_v = self.uavs[b].velocity[1] - self.uavs[a].velocity[1];
        let closing = if pb[1] > pa[1] { -rel_v } else { rel_v };
        (gap, d_mis, closing)
    }

    /// Connected docked groups (pairs in Docked phase).
    fn docked_groups(&self) -> Vec<Vec<usize>> {
        let n = self.uavs.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for p in &self.pairs {
            if p.phase == DockPhase::Docked {
                let (ra, rb) = (find(&mut parent, p.a), find(&mut parent, p.b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().filter(|g| g.len() > 1).collect()
    }
}

/// Advance the world by `dt`, applying velocity setpoints.
///
/// Invalid commands (non-finite, above the UAV's speed limit) are clamped and
/// reported as events rather than rejected. Deterministic given the state.
pub fn step(world: &mut World, dt: f64, commands: &Commands) -> Result<Vec<Event>, DockingError> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(DockingError::BadTimeStep(dt));
    }
    for &id in commands.keys() {
        if id >= world.uavs.len() {
            return Err(DockingError::UnknownUav(id));
        }
    }
    let mut events = Vec::new();

    // apply commands with clamping
    for uav in world.uavs.iter_mut() {
        if let Some(&cmd) = commands.get(&uav.id) {
            let mut v = cmd;
            let bad = v.iter().any(|x| !x.is_finite());
            if bad {
                v = [0.0; 3];
            }
            let speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if speed > uav.max_speed {
                let s = uav.max_speed / speed;
                v = [v[0] * s, v[1] * s, v[2] * s];
            }
            if bad || speed > uav.max_speed {
                events.push(Event {
                    time: world.time,
                    uavs: format!("{}", uav.id),
                    kind: "clamped".into(),
                    payload: format!("requested {:?}", cmd),
                });
            }
            uav.velocity = v;
        }
    }

    // rigid-body coupling: docked groups share the mean commanded velocity,
    // unless the pair is separating (handled in the phase machine below)
    let groups = world.docked_groups();
    for group in &groups {
        let mut mean = [0.0; 3];
        for &i in group {
            for k in 0..3 {
                mean[k] += world.uavs[i].velocity[k];
            }
        }
        for m in mean.iter_mut() {
            *m /= group.len() as f64;
        }
        for &i in group {
            world.uavs[i].velocity = mean;
        }
        // common-mode jitter preserves rigid distances exactly
        if world.jitter_sigma > 0.0 {
            let j: [f64; 3] = [
                world.rng.gen_range(-1.0..1.0) * world.jitter_sigma,
                world.rng.gen_range(-1.0..1.0) * world.jitter_sigma,
                world.rng.gen_range(-1.0..1.0) * world.jitter_sigma,
            ];
            for &i in group {
                for k in 0..3 {
                    world.uavs[i].position[k] += j[k];
                }
            }
        }
    }

    // capture override: a capturing pair closes at its recorded capture speed
    let mut capture_moves: Vec<(usize, usize, f64)> = Vec::new();
    for p in &world.pairs {
        if p.phase == DockPhase::Capturing {
            capture_moves.push((p.a, p.b, p.capture_speed));
        }
    }
    for &(a, b, speed) in &capture_moves {
        // freeze commanded motion, close symmetrically along the axis
        let dir = if world.uavs[b].position[1] > world.uavs[a].position[1] {
            1.0
        } else {
            -1.0
        };
        world.uavs[a].velocity = [0.0, dir * speed / 2.0, 0.0];
        world.uavs[b].velocity = [0.0, -dir * speed / 2.0, 0.0];
    }

    // integrate
    for uav in world.uavs.iter_mut() {
        for k in 0..3 {
            uav.position[k] += uav.velocity[k] * dt;
        }
    }
    world.time += dt;

    // re-pin docked followers to the stored rigid offset
    for i in 0..world.pairs.len() {
        if world.pairs[i].phase == DockPhase::Docked {
            let (a, b) = (world.pairs[i].a, world.pairs[i].b);
            let off = world.pairs[i].rigid_offset;
            let pa = world.uavs[a].position;
            world.uavs[b].position = [pa[0] + off[0], pa[1] + off[1], pa[2] + off[2]];
        }
    }

    // bracket funnel: lateral misalignment scales down with the closing gap
    for i in 0..world.pairs.len() {
        if world.pairs[i].phase == DockPhase::Capturing {
            let (a, b) = (world.pairs[i].a, world.pairs[i].b);
            let (gap, _, _) = world.pair_geometry(a, b);
            let entry_gap = world.pairs[i].capture_entry_gap.max(1e-9);
            let frac = (gap.max(0.0) / entry_gap).clamp(0.0, 1.0);
            let target_dmis = world.pairs[i].capture_entry_dmis * frac;
            // move b laterally toward alignment with a
            let pa = world.uavs[a].position;
            let pb = &mut world.uavs[b].position;
            let cur = ((pb[0] - pa[0]).powi(2) + (pb[2] - pa[2]).powi(2)).sqrt();
            if cur > 1e-12 {
                let scale = target_dmis / cur;
                pb[0] = pa[0] + (pb[0] - pa[0]) * scale;
                pb[2] = pa[2] + (pb[2] - pa[2]) * scale;
            }
        }
    }

    // phase machine
    let params = world.params;
    for i in 0..world.pairs.len() {
        let (a, b) = (world.pairs[i].a, world.pairs[i].b);
        let (gap, d_mis, closing) = world.pair_geometry(a, b);
        let phase = world.pairs[i].phase;
        let next = match phase {
            DockPhase::Separated => {
                if gap <= params.approach_range && closing > 0.0 {
                    Some(DockPhase::Approaching)
                } else {
                    None
                }
            }
            DockPhase::Approaching => {
                if gap <= params.capture_radius && closing.abs() <= params.capture_speed_limit {
                    Some(DockPhase::Capturing)
                } else if gap > params.approach_range {
                    Some(DockPhase::Separated)
                } else {
                    None
                }
            }
            DockPhase::Capturing => {
                if gap <= 1e-9 {
                    Some(DockPhase::Docked)
                } else {
                    None
                }
            }
            DockPhase::Docked => {
                // separation command: commanded (pre-coupling) velocities open the gap
                let ca = commands.get(&a).copied().unwrap_or([0.0; 3]);
                let cb = commands.get(&b).copied().unwrap_or([0.0; 3]);
                let rel = cb[1] - ca[1];
                let opening = if world.uavs[b].position[1] > world.uavs[a].position[1] {
                    rel
                } else {
                    -rel
                };
                if opening > params.separation_threshold {
                    Some(DockPhase::Undocking)
                } else {
                    None
                }
            }
            DockPhase::Undocking => {
                if gap > params.capture_radius {
                    Some(DockPhase::Separated)
                } else {
                    None
                }
            }
        };
        if let Some(next_phase) = next {
            debug_assert!(phase.legal_next().contains(&next_phase));
            match next_phase {
                DockPhase::Capturing => {
                    world.pairs[i].capture_entry_gap = gap.max(0.0);
                    world.pairs[i].capture_entry_dmis = d_mis;
                    world.pairs[i].capture_speed = closing.max(0.05);
                }
                DockPhase::Docked => {
                    // snap to the rigid docked geometry
                    let dir = if world.uavs[b].position[1] > world.uavs[a].position[1] {
                        1.0
                    } else {
                        -1.0
                    };
                    let pa = world.uavs[a].position;
                    world.uavs[b].position = [pa[0], pa[1] + dir * world.dock_distance, pa[2]];
                    let va = world.uavs[a].velocity;
                    world.uavs[b].velocity = va;
                    world.uavs[a].docked_to = Some(b);
                    world.uavs[b].docked_to = Some(a);
                    world.pairs[i].rigid_offset = [0.0, dir * world.dock_distance, 0.0];
                }
                DockPhase::Separated | DockPhase::Undocking => {
                    if next_phase == DockPhase::Undocking {
                        world.uavs[a].docked_to = None;
                        world.uavs[b].docked_to = None;
                        // release the rigid coupling: restore commanded motion
                        if let Some(&ca) = commands.get(&a) {
                            world.uavs[a].velocity = ca;
                        }
                        if let Some(&cb) = commands.get(&b) {
                            world.uavs[b].velocity = cb;
                        }
                    }
                }
                DockPhase::Approaching => {}
            }
            events.push(Event {
                time: world.time,
                uavs: format!("{a}:{b}"),
                kind: "phase".into(),
                payload: format!("{phase:?}->{next_phase:?}"),
            });
            world.pairs[i].phase = next_phase;
        }

        // refresh link state
        let (gap, d_mis, _) = world.pair_geometry(a, b);
        let phase = world.pairs[i].phase;
        let was_continuous = world.pairs[i].link.rf_path_continuous;
        let s12 = link_budget(phase, gap, d_mis, world.frequency);
        let continuous = phase == DockPhase::Docked;
        world.pairs[i].link = LinkState {
            gap: gap.max(0.0),
            d_mis,
            s12_db: s12,
            rf_path_continuous: continuous,
        };
        if continuous != was_continuous {
            events.push(Event {
                time: world.time,
                uavs: format!("{a}:{b}"),
                kind: "link".into(),
                payload: if continuous {
                    format!("up s12_db={s12:.2}")
                } else {
                    "down".into()
                },
            });
        }
    }

    Ok(events)
}

/// Connector transmission inserted in the feed path for one pair state.
///
/// Docked means perfect alignment (-0.2 dB class); while capturing the
/// brackets are still funnelling and the misalignment curve applies; any
/// other phase has no RF path at all.
pub fn link_budget(phase: DockPhase, _gap: f64, d_mis: f64, f: Frequency) -> f64 {
    match phase {
        DockPhase::Docked => misalignment_s12(0.0, f).unwrap_or(f64::NEG_INFINITY),
        DockPhase::Capturing => {
            if d_mis <= 10e-3 {
                misalignment_s12(d_mis, f).unwrap_or(f64::NEG_INFINITY)
            } else {
                f64::NEG_INFINITY
            }
        }
        _ => f64::NEG_INFINITY,
    }
}

// ---------------------------------------------------------------------------
// scenario scripts
// ---------------------------------------------------------------------------

/// One scheduled velocity setpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommandSpec {
    pub time: f64,
    pub uav: usize,
    pub velocity: [f64; 3],
}

/// UAV initial condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UavSpec {
    pub id: usize,
    pub position: [f64; 3],
    #[serde(default = "default_max_speed")]
    pub max_speed: f64,
}

fn default_max_speed() -> f64 {
    2.0
}

/// A docking scenario script (structured text document, TOML).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DockingScenario {
    pub name: String,
    pub duration: f64,
    pub dt: f64,
    #[serde(default = "default_dock_distance")]
    pub dock_distance: f64,
    #[serde(default = "default_frequency_hz")]
    pub frequency_hz: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub jitter_sigma: f64,
    #[serde(default = "CaptureParams::default_toml")]
    pub capture: CaptureParams,
    pub uavs: Vec<UavSpec>,
    /// Candidate docking pairs; defaults to consecutive ids.
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
    #[serde(default)]
    pub commands: Vec<CommandSpec>,
}

fn default_dock_distance() -> f64 {
    0.5
}

fn default_frequency_hz() -> f64 {
    300e6
}

impl CaptureParams {
    fn default_toml() -> CaptureParams {
        CaptureParams::default()
    }
}

impl DockingScenario {
    pub fn from_toml(text: &str) -> Result<Self, DockingError> {
        toml::from_str(text).map_err(|e| DockingError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// The mid-flight demonstration timeline: two UAVs close from a 1 m gap
    /// at 0.2 m/s, dock at ~5 s, and separate on command at 13 s. The
    /// approach speed and capture distance are calibration choices (the
    /// source timeline reports only the dock/undock instants).
    pub fn paper_timeline() -> Self {
        Self {
            name: "mid-flight-dock-undock".into(),
            duration: 15.0,
            dt: 0.01,
            dock_distance: 0.5,
            frequency_hz: 300e6,
            seed: 7,
            jitter_sigma: 0.0,
            capture: CaptureParams::default(),
            uavs: vec![
                UavSpec { id: 0, position: [0.0, 0.0, 1.0], max_speed: 2.0 },
                UavSpec { id: 1, position: [0.0, 1.5, 1.0], max_speed: 2.0 },
            ],
            pairs: vec![[0, 1]],
            commands: vec![
                CommandSpec { time: 0.0, uav: 0, velocity: [0.0, 0.1, 0.0] },
                CommandSpec { time: 0.0, uav: 1, velocity: [0.0, -0.1, 0.0] },
                CommandSpec { time: 13.0, uav: 0, velocity: [0.0, -0.3, 0.0] },
                CommandSpec { time: 13.0, uav: 1, velocity: [0.0, 0.3, 0.0] },
            ],
        }
    }
}

/// Run a scenario script to completion; returns the ordered event log.
pub fn run_scenario(script: &DockingScenario) -> Result<Vec<Event>, DockingError> {
    let max_id = script.uavs.iter().map(|u| u.id).max().unwrap_or(0);
    let mut by_id = vec![None; max_id + 1];
    for u in &script.uavs {
        by_id[u.id] = Some(u.clone());
    }
    let uavs: Vec<UavKinematicState> = (0..=max_id)
        .map(|id| {
            by_id[id]
                .as_ref()
                .map(|u| UavKinematicState {
                    id,
                    position: u.position,
                    velocity: [0.0; 3],
                    max_speed: u.max_speed,
                    docked_to: None,
                })
                .ok_or(DockingError::UnknownUav(id))
        })
        .collect::<Result<_, _>>()?;
    for c in &script.commands {
        if c.uav > max_id || by_id[c.uav].is_none() {
            return Err(DockingError::UnknownUav(c.uav));
        }
    }
    let pairs: Vec<(usize, usize)> = if script.pairs.is_empty() {
        (1..script.uavs.len()).map(|i| (i - 1, i)).collect()
    } else {
        script.pairs.iter().map(|p| (p[0], p[1])).collect()
    };
    let mut world = World::new(
        uavs,
        pairs,
        script.capture,
        script.dock_distance,
        Frequency::from_hertz(script.frequency_hz).map_err(|e| DockingError::Parse(e.to_string()))?,
        script.jitter_sigma,
        script.seed,
    )?;

    let mut schedule: Vec<&CommandSpec> = script.commands.iter().collect();
    schedule.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap().then(a.uav.cmp(&b.uav)));
    let mut active: Commands = BTreeMap::new();
    let mut next_cmd = 0usize;

    let mut log = Vec::new();
    let steps = (script.duration / script.dt).round() as usize;
    for _ in 0..steps {
        while next_cmd < schedule.len() && schedule[next_cmd].time <= world.time + 1e-12 {
            active.insert(schedule[next_cmd].uav, schedule[next_cmd].velocity);
            next_cmd += 1;
        }
        log.extend(step(&mut world, script.dt, &active)?);
    }
    Ok(log)
}

/// Render an event log as the line-per-record text document.
pub fn log_to_text(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        let _ = writeln!(out, "{}", e.to_line());
    }
    out
}

/// Check that a log contains only legal phase transitions per pair.
pub fn validate_log(events: &[Event]) -> Result<(), DockingError> {
    let mut phases: BTreeMap<String, DockPhase> = BTreeMap::new();
    for e in events {
        if e.kind != "phase" {
            continue;
        }
        let (from_s, to_s) = e
            .payload
            .split_once("->")
            .ok_or_else(|| DockingError::Parse(format!("bad payload '{}'", e.payload)))?;
        let parse = |s: &str| -> Result<DockPhase, DockingError> {
            match s {
                "Separated" => Ok(DockPhase::Separated),
                "Approaching" => Ok(DockPhase::Approaching),
                "Capturing" => Ok(DockPhase::Capturing),
                "Docked" => Ok(DockPhase::Docked),
                "Undocking" => Ok(DockPhase::Undocking),
                other => Err(DockingError::Parse(format!("unknown phase '{other}'"))),
            }
        };
        let from = parse(from_s)?;
        let to = parse(to_s)?;
        let current = phases.entry(e.uavs.clone()).or_insert(DockPhase::Separated);
        if *current != from || !from.legal_next().contains(&to) {
            return Err(DockingError::IllegalTransition { from: *current, to });
        }
        *current = to;
    }
    Ok(())
}
