//! Event-driven integration on the invariant sets.
//!
//! Inside a smooth piece the active field is integrated with classical RK4 at a
//! fixed step. The end of a piece is an event located by bisection on the step
//! fraction:
//!
//! * a crossing of `Σ` (sign change of `y` away from the folds), after which
//!   the trajectory continues with the other field;
//! * a fold hit (`x` reaches the fold closing the arc) or, for petal systems, the
//!   return to the origin. The flow is not unique there: the next arc is chosen
//!   by a [`BranchPolicy`].
//!
//! Which field is active is tracked by an explicit mode machine over the arc
//! partition, never inferred from the sign of `y`, so round-off near the folds
//! cannot flip the mode.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::model::{rotate, Family, PlanarField, Psvf, Side};
use crate::symbolic::{ArcKind, ArcPartition, Location};

/// Largest accepted integration step.
pub const MAX_DT: f64 = 1e-3;
/// Width of the bisection bracket for event times.
pub const EVENT_TOL: f64 = 1e-10;
/// Distance from the invariant set tolerated for an initial point.
pub const START_TOL: f64 = 1e-9;
/// Sign changes of `y` closer than this to a fold are not crossings.
const FOLD_GUARD: f64 = 1e-4;

/// How the next arc is chosen at a fold (or at the petal junction).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BranchPolicy {
    /// `s_0` is the arc occupied at `t = 0` (chosen there if the start is a
    /// fold); each later fold consumes the next symbol.
    Prescribed(Vec<usize>),
    /// Row-major `m × m` weights: leaving arc `a`, the next arc `b` is drawn with
    /// probability proportional to `weights[a * m + b]` among the admissible
    /// continuations. A start at a fold draws uniformly.
    RandomWeighted { weights: Vec<f64>, seed: u64 },
    /// Leftward arc at a `Z_k` fold; previous petal (`i - 1`) for petals.
    AlwaysLeft,
    /// Rightward arc at a `Z_k` fold; next petal (`i + 1`) for petals.
    AlwaysRight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    SigmaCross,
    /// Fold `p_j`, 1-based.
    FoldHit(usize),
    /// Arc taken after a fold or junction.
    BranchChoice(usize),
    /// Return of a petal orbit to the origin.
    Junction,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub side: Side,
    pub arc: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum PhaseEnd {
    Crossing(f64),
    Fold(usize),
    Junction,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct State {
    t: f64,
    arc: usize,
    phase: u8,
    local: (f64, f64),
}

fn phase_side(kind: ArcKind, phase: u8) -> Side {
    match (kind, phase) {
        (ArcKind::LeftLoop, 0) | (ArcKind::Lower, _) | (ArcKind::RightLoop, 1) | (ArcKind::Petal, 1) => Side::Minus,
        _ => Side::Plus,
    }
}

fn frame_angle(partition: &ArcPartition, arc: usize) -> f64 {
    match partition.family() {
        Family::Zk => 0.0,
        Family::Petal => 2.0 * PI * arc as f64 / partition.k() as f64,
    }
}

fn to_global(partition: &ArcPartition, arc: usize, local: (f64, f64)) -> (f64, f64) {
    match partition.family() {
        Family::Zk => local,
        Family::Petal => rotate(local, frame_angle(partition, arc)),
    }
}

fn to_local(partition: &ArcPartition, arc: usize, global: (f64, f64)) -> (f64, f64) {
    match partition.family() {
        Family::Zk => global,
        Family::Petal => rotate(global, -frame_angle(partition, arc)),
    }
}

fn phase_end(partition: &ArcPartition, arc: usize, phase: u8) -> PhaseEnd {
    let a = partition.arc(arc);
    let (r0, r1) = partition.crossing_x();
    match (a.kind, phase) {
        (ArcKind::LeftLoop, 0) => PhaseEnd::Crossing(r0),
        (ArcKind::RightLoop, 0) => PhaseEnd::Crossing(r1),
        (ArcKind::Petal, 0) => PhaseEnd::Crossing(2.0),
        (ArcKind::Petal, _) => PhaseEnd::Junction,
        _ => PhaseEnd::Fold(a.end),
    }
}

/// One classical RK4 step for a field depending on `x` only.
#[inline]
fn rk4(field: &PlanarField, p: (f64, f64), h: f64) -> (f64, f64) {
    let k1 = field.velocity(p);
    let k2 = field.velocity((p.0 + 0.5 * h * k1.0, p.1 + 0.5 * h * k1.1));
    let k3 = field.velocity((p.0 + 0.5 * h * k2.0, p.1 + 0.5 * h * k2.1));
    let k4 = field.velocity((p.0 + h * k3.0, p.1 + h * k3.1));
    (
        p.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        p.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Integrates one smooth field for a signed duration in steps of at most `dt`.
pub fn integrate_piece(field: &PlanarField, p: (f64, f64), duration: f64, dt: f64) -> (f64, f64) {
    let steps = math::ceil(math::abs(duration) / dt).max(1.0) as usize;
    let h = duration / steps as f64;
    (0..steps).fold(p, |q, _| rk4(field, q, h))
}

/// Arc choice at branch points, with its own random state.
#[derive(Clone, Debug)]
pub(crate) struct Brancher {
    policy: BranchPolicy,
    next: usize,
    rng: ChaCha8Rng,
}

impl Brancher {
    pub(crate) fn new(policy: BranchPolicy, partition: &ArcPartition) -> Result<Self> {
        let m = partition.len();
        let seed = match &policy {
            BranchPolicy::Prescribed(symbols) => {
                partition.transition_graph().check_word(symbols)?;
                0
            }
            BranchPolicy::RandomWeighted { weights, seed } => {
                if weights.len() != m * m {
                    return Err(Error::invalid("weights", alloc::format!("expected {} entries", m * m)));
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(Error::invalid("weights", "weights must be finite and nonnegative"));
                }
                *seed
            }
            _ => 0,
        };
        Ok(Brancher {
            policy,
            next: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Consumes `s_0` for a start in the interior of `arc`.
    fn start_inside(&mut self, arc: usize) -> Result<()> {
        if let BranchPolicy::Prescribed(symbols) = &self.policy {
            match symbols.first() {
                Some(&s) if s == arc => self.next = 1,
                Some(&s) => return Err(Error::Inadmissible { from: None, symbol: s }),
                None => return Err(Error::PrescriptionExhausted { t: 0.0 }),
            }
        }
        Ok(())
    }

    fn choose(&mut self, partition: &ArcPartition, from: Option<usize>, at: Location, t: f64) -> Result<usize> {
        let options = partition.departures(at);
        let m = partition.len();
        match &self.policy {
            BranchPolicy::Prescribed(symbols) => {
                let symbol = *symbols.get(self.next).ok_or(Error::PrescriptionExhausted { t })?;
                self.next += 1;
                if options.contains(&symbol) {
                    Ok(symbol)
                } else {
                    Err(Error::Inadmissible { from, symbol })
                }
            }
            BranchPolicy::RandomWeighted { weights, .. } => {
                let w: Vec<f64> = options
                    .iter()
                    .map(|&b| from.map_or(1.0, |a| weights[a * m + b]))
                    .collect();
                let total: f64 = w.iter().sum();
                if total <= 0.0 {
                    return Err(Error::invalid("weights", "no admissible continuation has positive weight"));
                }
                let mut u = self.rng.gen::<f64>() * total;
                for (&b, &wb) in options.iter().zip(&w) {
                    if u < wb {
                        return Ok(b);
                    }
                    u -= wb;
                }
                Ok(*options.iter().zip(&w).rev().find(|(_, &wb)| wb > 0.0).map(|(b, _)| b).unwrap_or(&options[0]))
            }
            BranchPolicy::AlwaysLeft | BranchPolicy::AlwaysRight => {
                let right = matches!(self.policy, BranchPolicy::AlwaysRight);
                Ok(match partition.family() {
                    Family::Zk => options[usize::from(right)],
                    Family::Petal => match from {
                        None => 0,
                        Some(a) if right => (a + 1) % m,
                        Some(a) => (a + m - 1) % m,
                    },
                })
            }
        }
    }
}

/// Callbacks receiving the output of [`Engine::run`].
trait Recorder {
    fn sample(&mut self, _s: Sample) {}
    fn event(&mut self, _e: Event) {}
}

struct Discard;
impl Recorder for Discard {}

struct Record {
    samples: Vec<Sample>,
    events: Vec<Event>,
}

impl Recorder for Record {
    fn sample(&mut self, s: Sample) {
        match self.samples.last_mut() {
            Some(last) if s.t <= last.t => *last = s,
            _ => self.samples.push(s),
        }
    }

    fn event(&mut self, e: Event) {
        self.events.push(e);
    }
}

struct Engine<'a> {
    psvf: &'a Psvf,
    partition: &'a ArcPartition,
    dt: f64,
}

impl Engine<'_> {
    fn side(&self, st: &State) -> Side {
        phase_side(self.partition.arc(st.arc).kind, st.phase)
    }

    fn emit_sample<R: Recorder>(&self, st: &State, rec: &mut R) {
        let (x, y) = to_global(self.partition, st.arc, st.local);
        rec.sample(Sample {
            t: st.t,
            x,
            y,
            side: self.side(st),
            arc: st.arc,
        });
    }

    fn near_fold(&self, p: (f64, f64)) -> bool {
        match self.partition.family() {
            Family::Zk => self
                .psvf
                .fold_abscissae()
                .iter()
                .any(|&f| math::abs(p.0 - f) <= FOLD_GUARD),
            Family::Petal => math::hypot(p.0, p.1) <= FOLD_GUARD,
        }
    }

    /// Event function of the current phase; the phase ends where it becomes `>= 0`.
    fn end_reached(&self, end: PhaseEnd, side: Side, p: (f64, f64)) -> bool {
        match end {
            PhaseEnd::Fold(j) => {
                let f = self.partition.fold_x(j);
                match side {
                    Side::Plus => p.0 - f >= 0.0,
                    Side::Minus => f - p.0 >= 0.0,
                }
            }
            PhaseEnd::Crossing(_) => {
                let g = match side {
                    Side::Plus => -p.1,
                    Side::Minus => p.1,
                };
                g >= 0.0 && !self.near_fold(p)
            }
            PhaseEnd::Junction => p.0 <= 0.0,
        }
    }

    /// Starts from an arbitrary point of the invariant set.
    fn start_state<R: Recorder>(&self, p0: (f64, f64), brancher: &mut Brancher, rec: &mut R) -> Result<State> {
        match self.partition.locate(p0, START_TOL)? {
            Location::Arc(arc) => {
                brancher.start_inside(arc)?;
                let local = to_local(self.partition, arc, p0);
                let kind = self.partition.arc(arc).kind;
                let phase = match kind {
                    ArcKind::LeftLoop => {
                        let (r0, _) = self.partition.crossing_x();
                        u8::from(local.1 > 0.0 || math::abs(local.0 - r0) <= START_TOL)
                    }
                    ArcKind::RightLoop => {
                        let (_, r1) = self.partition.crossing_x();
                        u8::from(local.1 < 0.0 || math::abs(local.0 - r1) <= START_TOL)
                    }
                    ArcKind::Petal => u8::from(local.1 < 0.0 || math::abs(local.0 - 2.0) <= START_TOL),
                    _ => 0,
                };
                let st = State {
                    t: 0.0,
                    arc,
                    phase,
                    local,
                };
                self.emit_sample(&st, rec);
                Ok(st)
            }
            at => {
                let (point, kind) = match at {
                    Location::Fold(j) => ((self.partition.fold_x(j), 0.0), EventKind::FoldHit(j)),
                    _ => ((0.0, 0.0), EventKind::Junction),
                };
                rec.event(Event {
                    t: 0.0,
                    kind,
                    x: point.0,
                    y: point.1,
                });
                let arc = brancher.choose(self.partition, None, at, 0.0)?;
                rec.event(Event {
                    t: 0.0,
                    kind: EventKind::BranchChoice(arc),
                    x: point.0,
                    y: point.1,
                });
                let st = State {
                    t: 0.0,
                    arc,
                    phase: 0,
                    local: point,
                };
                self.emit_sample(&st, rec);
                Ok(st)
            }
        }
    }

    fn run<R: Recorder>(&self, mut st: State, t_end: f64, brancher: &mut Brancher, rec: &mut R) -> Result<State> {
        while t_end - st.t > 1e-15 {
            let side = self.side(&st);
            let field = self.psvf.field(side);
            let end = phase_end(self.partition, st.arc, st.phase);
            let h = self.dt.min(t_end - st.t);
            let next = rk4(field, st.local, h);
            if !self.end_reached(end, side, next) {
                st.t += h;
                st.local = next;
                self.emit_sample(&st, rec);
                continue;
            }
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > EVENT_TOL {
                let mid = 0.5 * (lo + hi);
                if self.end_reached(end, side, rk4(field, st.local, mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            st.t += hi;
            match end {
                PhaseEnd::Crossing(x) => {
                    st.local = (x, 0.0);
                    st.phase = 1;
                    let (gx, gy) = to_global(self.partition, st.arc, st.local);
                    rec.event(Event {
                        t: st.t,
                        kind: EventKind::SigmaCross,
                        x: gx,
                        y: gy,
                    });
                }
                PhaseEnd::Fold(_) | PhaseEnd::Junction => {
                    let (at, point, kind) = match end {
                        PhaseEnd::Fold(j) => (Location::Fold(j), (self.partition.fold_x(j), 0.0), EventKind::FoldHit(j)),
                        _ => (Location::Junction, (0.0, 0.0), EventKind::Junction),
                    };
                    rec.event(Event {
                        t: st.t,
                        kind,
                        x: point.0,
                        y: point.1,
                    });
                    let arc = brancher.choose(self.partition, Some(st.arc), at, st.t)?;
                    rec.event(Event {
                        t: st.t,
                        kind: EventKind::BranchChoice(arc),
                        x: point.0,
                        y: point.1,
                    });
                    st.arc = arc;
                    st.phase = 0;
                    st.local = point;
                }
            }
            self.emit_sample(&st, rec);
        }
        Ok(st)
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::invalid("dt", "step must lie in (0, 1e-3]"));
    }
    Ok(())
}

/// A global trajectory: samples of every smooth piece plus the event log.
#[derive(Clone, Debug)]
pub struct Trajectory {
    psvf: Psvf,
    partition: ArcPartition,
    samples: Vec<Sample>,
    events: Vec<Event>,
    dt: f64,
}

/// Integrates from `p0` over `[0, t_end]`.
///
/// `p0` must lie within `1e-9` of the invariant set. A start at a fold (or at
/// the petal origin) is the fold-anchored representative: the first arc is
/// chosen at `t = 0` by the policy.
pub fn integrate(psvf: &Psvf, p0: (f64, f64), policy: BranchPolicy, t_end: f64, dt: f64) -> Result<Trajectory> {
    check_dt(dt)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::invalid("t_end", "must be positive and finite"));
    }
    let partition = ArcPartition::for_system(psvf)?;
    let mut brancher = Brancher::new(policy, &partition)?;
    let mut rec = Record {
        samples: Vec::with_capacity(math::ceil(t_end / dt) as usize + 16),
        events: Vec::new(),
    };
    let engine = Engine {
        psvf,
        partition: &partition,
        dt,
    };
    let st = engine.start_state(p0, &mut brancher, &mut rec)?;
    engine.run(st, t_end, &mut brancher, &mut rec)?;
    Ok(Trajectory {
        psvf: psvf.clone(),
        partition,
        samples: rec.samples,
        events: rec.events,
        dt,
    })
}

/// Point reached after time `s ∈ [0, 1]` along `arc` from its start, in closed form.
///
/// `Z_k` arcs move with `|dx/dt| = 1` on `y = ±P_k(x)`; petal arcs with
/// `|du/dt| = 4` on `v = ±c(u - u^2/2)` in the petal's own frame.
pub fn arc_point(partition: &ArcPartition, arc: usize, s: f64) -> (f64, f64) {
    let (local, _) = arc_state(partition, arc, s);
    to_global(partition, arc, local)
}

fn arc_state(partition: &ArcPartition, arc: usize, s: f64) -> ((f64, f64), u8) {
    let a = partition.arc(arc);
    let (r0, r1) = partition.crossing_x();
    if a.kind == ArcKind::Petal {
        let c = partition.petal_slope();
        let (u, sign, phase) = if s < 0.5 { (4.0 * s, 1.0, 0) } else { (4.0 - 4.0 * s, -1.0, 1) };
        return ((u, sign * c * (u - u * u / 2.0)), phase);
    }
    let pk = partition.pk().expect("Z_k partition carries P_k");
    let (x, upper, phase) = match a.kind {
        ArcKind::LeftLoop if s < 0.5 => (partition.fold_x(a.start) - s, false, 0),
        ArcKind::LeftLoop => (r0 + (s - 0.5), true, 1),
        ArcKind::RightLoop if s < 0.5 => (partition.fold_x(a.start) + s, true, 0),
        ArcKind::RightLoop => (r1 - (s - 0.5), false, 1),
        ArcKind::Upper => (partition.fold_x(a.start) + s, true, 0),
        _ => (partition.fold_x(a.start) - s, false, 0),
    };
    let y = pk.eval(x);
    ((x, if upper { y } else { -y }), phase)
}

/// Flows for `duration` from the point at time `s` along `arc` and returns the arc
/// occupied at the end. Nothing is recorded.
pub(crate) fn land_after(
    psvf: &Psvf,
    partition: &ArcPartition,
    arc: usize,
    s: f64,
    duration: f64,
    dt: f64,
    brancher: &mut Brancher,
) -> Result<usize> {
    let (local, phase) = arc_state(partition, arc, s);
    let engine = Engine { psvf, partition, dt };
    let st = State {
        t: 0.0,
        arc,
        phase,
        local,
    };
    Ok(engine.run(st, duration, brancher, &mut Discard)?.arc)
}

impl Trajectory {
    pub fn psvf(&self) -> &Psvf {
        &self.psvf
    }

    pub fn partition(&self) -> &ArcPartition {
        &self.partition
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let (start, end) = self.time_range();
        if !(t >= start - 1e-12 && t <= end + 1e-12) {
            return Err(Error::OutOfRange { t, start, end });
        }
        Ok(())
    }

    /// Index of the sample governing time `t` (the last one at or before it).
    fn sample_index(&self, t: f64) -> usize {
        self.samples.partition_point(|s| s.t <= t).saturating_sub(1)
    }

    /// Arc occupied at time `t` (at an event time, the arc just entered).
    pub fn arc_at(&self, t: f64) -> Result<usize> {
        self.check_time(t)?;
        Ok(self.samples[self.sample_index(t)].arc)
    }

    /// `γ(t)`, integrating from the governing sample with the field of its piece.
    pub fn position_at(&self, t: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        let s = &self.samples[self.sample_index(t)];
        let h = t - s.t;
        if h <= 0.0 {
            return Ok((s.x, s.y));
        }
        let local = to_local(&self.partition, s.arc, (s.x, s.y));
        let p = integrate_piece(self.psvf.field(s.side), local, h, self.dt);
        Ok(to_global(&self.partition, s.arc, p))
    }

    /// `T_1(γ)(t) = γ(t + 1)`.
    pub fn time_one_map(&self, t: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        self.check_time(t + 1.0)?;
        self.position_at(t + 1.0)
    }

    /// Fold hits `(t, j)`; petal junction returns are reported with `j = 0`.
    pub fn fold_hits(&self) -> Vec<(f64, usize)> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::FoldHit(j) => Some((e.t, j)),
                EventKind::Junction => Some((e.t, 0)),
                _ => None,
            })
            .collect()
    }

    /// The trajectory `γ(· + offset)`, defined on `[start, end - offset]`.
    pub fn shifted(&self, offset: f64) -> Result<Trajectory> {
        let (start, end) = self.time_range();
        let from = start + offset;
        if !(offset >= 0.0 && from < end) {
            return Err(Error::OutOfRange { t: from, start, end });
        }
        let (x, y) = self.position_at(from)?;
        let head = &self.samples[self.sample_index(from)];
        let mut samples = vec![Sample {
            t: start,
            x,
            y,
            side: head.side,
            arc: head.arc,
        }];
        samples.extend(
            self.samples
                .iter()
                .filter(|s| s.t > from)
                .map(|s| Sample { t: s.t - offset, ..*s }),
        );
        let events = self
            .events
            .iter()
            .filter(|e| e.t >= from)
            .map(|e| Event { t: e.t - offset, ..*e })
            .collect();
        Ok(Trajectory {
            psvf: self.psvf.clone(),
            partition: self.partition.clone(),
            samples,
            events,
            dt: self.dt,
        })
    }

    /// Largest deviation of the samples from the invariant set.
    pub fn max_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| drift(&self.partition, s))
            .fold(0.0, f64::max)
    }
}

fn drift(partition: &ArcPartition, s: &Sample) -> f64 {
    match partition.pk() {
        Some(pk) => {
            // y - P_k is conserved on X+, y + P_k on X-.
            let p = pk.eval(s.x);
            match s.side {
                Side::Plus => math::abs(s.y - p),
                Side::Minus => math::abs(s.y + p),
            }
        }
        None => {
            let (u, v) = to_local(partition, s.arc, (s.x, s.y));
            let h = partition.petal_slope() * (u - u * u / 2.0);
            match s.side {
                Side::Plus => math::abs(v - h),
                Side::Minus => math::abs(v + h),
            }
        }
    }
}
