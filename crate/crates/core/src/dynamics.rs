//! Linear time-invariant agent models, rollout and box-bound checks.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("bound for component {0} is not a finite interval")]
    InfiniteBound(usize),
    #[error("unknown model preset {0:?}")]
    UnknownPreset(String),
}

/// `x(k+1) = A x(k) + B u(k)` with box state/control spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentModel {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    state_bounds: Vec<(f64, f64)>,
    control_bounds: Vec<(f64, f64)>,
    state_names: Vec<String>,
    control_names: Vec<String>,
}

impl AgentModel {
    /// Row-major `a` (n×n) and `b` (n×m).
    pub fn new(
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        state_bounds: Vec<(f64, f64)>,
        control_bounds: Vec<(f64, f64)>,
    ) -> Result<Self, DynamicsError> {
        let n = a.len();
        if a.iter().any(|r| r.len() != n) {
            return Err(DynamicsError::Dimension("A must be square".into()));
        }
        if b.len() != n {
            return Err(DynamicsError::Dimension(format!("B has {} rows, expected {n}", b.len())));
        }
        let m = b.first().map_or(0, Vec::len);
        if b.iter().any(|r| r.len() != m) {
            return Err(DynamicsError::Dimension("B rows differ in length".into()));
        }
        if state_bounds.len() != n || control_bounds.len() != m {
            return Err(DynamicsError::Dimension(format!(
                "bounds have {}x{} entries, expected {n}x{m}",
                state_bounds.len(),
                control_bounds.len()
            )));
        }
        for (i, (lo, hi)) in state_bounds.iter().chain(&control_bounds).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(DynamicsError::InfiniteBound(i));
            }
        }
        Ok(Self {
            a,
            b,
            state_bounds,
            control_bounds,
            state_names: (1..=n).map(|i| format!("x{i}")).collect(),
            control_names: (1..=m).map(|i| format!("u{i}")).collect(),
        })
    }

    pub fn with_names(mut self, states: Vec<String>, controls: Vec<String>) -> Result<Self, DynamicsError> {
        if states.len() != self.nx() || controls.len() != self.nu() {
            return Err(DynamicsError::Dimension("component name count".into()));
        }
        self.state_names = states;
        self.control_names = controls;
        Ok(self)
    }

    /// Planar double integrator with unit step: position `z`, velocity `v`,
    /// `z⁺ = z + v + u/2`, `v⁺ = v + u`, on `[0,7]×[0,5]×[-2,2]²` with
    /// controls in `[-2,2]²`.
    pub fn double_integrator() -> Self {
        let a = vec![
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        let b = vec![
            vec![0.5, 0.0],
            vec![0.0, 0.5],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ];
        Self::new(
            a,
            b,
            vec![(0.0, 7.0), (0.0, 5.0), (-2.0, 2.0), (-2.0, 2.0)],
            vec![(-2.0, 2.0), (-2.0, 2.0)],
        )
        .and_then(|m| {
            m.with_names(
                ["zx", "zy", "vx", "vy"].map(String::from).to_vec(),
                ["ux", "uy"].map(String::from).to_vec(),
            )
        })
        .expect("preset is well formed")
    }

    /// Planar single integrator `z⁺ = z + u` on `[-10,10]²`, controls in `[-1,1]²`.
    pub fn single_integrator() -> Self {
        Self::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![(-10.0, 10.0); 2],
            vec![(-1.0, 1.0); 2],
        )
        .and_then(|m| m.with_names(vec!["zx".into(), "zy".into()], vec!["ux".into(), "uy".into()]))
        .expect("preset is well formed")
    }

    /// Scalar integrator `x⁺ = x + u` on `[-10,10]`, control in `[-1,1]`.
    pub fn scalar_integrator() -> Self {
        Self::new(vec![vec![1.0]], vec![vec![1.0]], vec![(-10.0, 10.0)], vec![(-1.0, 1.0)])
            .expect("preset is well formed")
    }

    pub fn preset(id: &str) -> Result<Self, DynamicsError> {
        match id {
            "double_integrator" => Ok(Self::double_integrator()),
            "single_integrator" => Ok(Self::single_integrator()),
            "scalar_integrator" => Ok(Self::scalar_integrator()),
            other => Err(DynamicsError::UnknownPreset(other.to_string())),
        }
    }

    pub const PRESETS: [&'static str; 3] = ["double_integrator", "single_integrator", "scalar_integrator"];

    pub fn nx(&self) -> usize {
        self.a.len()
    }

    pub fn nu(&self) -> usize {
        self.control_bounds.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn state_bounds(&self) -> &[(f64, f64)] {
        &self.state_bounds
    }

    pub fn control_bounds(&self) -> &[(f64, f64)] {
        &self.control_bounds
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn control_names(&self) -> &[String] {
        &self.control_names
    }

    /// One step of the dynamics.
    pub fn step(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        (0..self.nx())
            .map(|i| {
                let ax: f64 = self.a[i].iter().zip(x).map(|(a, x)| a * x).sum();
                let bu: f64 = self.b[i].iter().zip(u).map(|(b, u)| b * u).sum();
                ax + bu
            })
            .collect()
    }
}

/// States `x(0..=H)` of one agent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(states: Vec<Vec<f64>>) -> Result<Self, DynamicsError> {
        let dim = states.first().map_or(0, Vec::len);
        if states.iter().any(|s| s.len() != dim) {
            return Err(DynamicsError::Dimension("trajectory states differ in length".into()));
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn state(&self, k: usize) -> Option<&[f64]> {
        self.states.get(k).map(Vec::as_slice)
    }

    /// Last time index `H`.
    pub fn horizon(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }
}

/// Controls `u(0..H)` of one agent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSequence {
    controls: Vec<Vec<f64>>,
}

impl ControlSequence {
    pub fn new(controls: Vec<Vec<f64>>) -> Self {
        Self { controls }
    }

    pub fn zeros(horizon: usize, nu: usize) -> Self {
        Self::new(vec![vec![0.0; nu]; horizon])
    }

    pub fn controls(&self) -> &[Vec<f64>] {
        &self.controls
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }
}

/// Trajectories of the whole team, indexed by agent id - 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeamTrajectory {
    agents: Vec<Trajectory>,
}

impl TeamTrajectory {
    pub fn new(agents: Vec<Trajectory>) -> Result<Self, DynamicsError> {
        let len = agents.first().map_or(0, |t| t.states.len());
        if agents.iter().any(|t| t.states.len() != len) {
            return Err(DynamicsError::Dimension("team trajectories differ in length".into()));
        }
        Ok(Self { agents })
    }

    pub fn agent(&self, id: crate::spec::AgentId) -> Option<&Trajectory> {
        id.checked_sub(1).and_then(|i| self.agents.get(i))
    }

    pub fn agents(&self) -> &[Trajectory] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Common last time index.
    pub fn horizon(&self) -> usize {
        self.agents.first().map_or(0, Trajectory::horizon)
    }
}

pub fn rollout(model: &AgentModel, x0: &[f64], u: &ControlSequence) -> Result<Trajectory, DynamicsError> {
    if x0.len() != model.nx() {
        return Err(DynamicsError::Dimension(format!(
            "x0 has {} components, model expects {}",
            x0.len(),
            model.nx()
        )));
    }
    if let Some(bad) = u.controls.iter().find(|c| c.len() != model.nu()) {
        return Err(DynamicsError::Dimension(format!(
            "control has {} components, model expects {}",
            bad.len(),
            model.nu()
        )));
    }
    let mut states = Vec::with_capacity(u.len() + 1);
    states.push(x0.to_vec());
    for uk in &u.controls {
        let next = model.step(states.last().unwrap(), uk);
        states.push(next);
    }
    Ok(Trajectory { states })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    State,
    Control,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub k: usize,
    pub kind: BoundKind,
    pub component: usize,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Every violated closed bound. Empty means admissible.
pub fn check_bounds(model: &AgentModel, traj: &Trajectory, u: &ControlSequence) -> Vec<BoundViolation> {
    check_bounds_with_tolerance(model, traj, u, 0.0)
}

pub fn check_bounds_with_tolerance(
    model: &AgentModel,
    traj: &Trajectory,
    u: &ControlSequence,
    tol: f64,
) -> Vec<BoundViolation> {
    let mut out = Vec::new();
    let mut scan = |kind, k, values: &[f64], bounds: &[(f64, f64)]| {
        for (component, (&value, &(lo, hi))) in values.iter().zip(bounds).enumerate() {
            if value < lo - tol || value > hi + tol {
                out.push(BoundViolation { k, kind, component, value, lo, hi });
            }
        }
    };
    for (k, x) in traj.states.iter().enumerate() {
        scan(BoundKind::State, k, x, &model.state_bounds);
    }
    for (k, uk) in u.controls.iter().enumerate() {
        scan(BoundKind::Control, k, uk, &model.control_bounds);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn double_integrator_first_step() {
        let m = AgentModel::double_integrator();
        let mut u = ControlSequence::zeros(1, 2);
        u.controls[0] = vec![1.0, 0.0];
        let t = rollout(&m, &[0.0; 4], &u).unwrap();
        assert_eq!(t.state(1).unwrap(), &[0.5, 0.0, 1.0, 0.0]);
        assert_eq!(t.horizon(), 1);
    }

    #[test]
    fn identity_with_zero_input_is_constant() {
        let m = AgentModel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0], vec![1.0]], vec![(-1.0, 1.0); 2], vec![(-1.0, 1.0)]).unwrap();
        let t = rollout(&m, &[0.3, -0.2], &ControlSequence::zeros(5, 1)).unwrap();
        assert!(t.states().iter().all(|s| s == &[0.3, -0.2]));
    }

    #[test]
    fn rollout_dimension_errors() {
        let m = AgentModel::double_integrator();
        assert!(rollout(&m, &[0.0; 3], &ControlSequence::zeros(2, 2)).is_err());
        assert!(rollout(&m, &[0.0; 4], &ControlSequence::zeros(2, 3)).is_err());
        assert!(AgentModel::new(vec![vec![1.0]], vec![vec![1.0]], vec![(0.0, f64::INFINITY)], vec![(0.0, 1.0)]).is_err());
    }

    #[test]
    fn bounds_example_violation() {
        let m = AgentModel::double_integrator();
        let t = Trajectory::new(vec![vec![7.5, 1.0, 0.0, 0.0]]).unwrap();
        let v = check_bounds(&m, &t, &ControlSequence::new(vec![]));
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].k, v[0].component, v[0].kind), (0, 0, BoundKind::State));
    }

    #[test]
    fn bounds_are_closed() {
        let m = AgentModel::double_integrator();
        let t = rollout(&m, &[0.0; 4], &ControlSequence::zeros(3, 2)).unwrap();
        assert!(check_bounds(&m, &t, &ControlSequence::zeros(3, 2)).is_empty());
        let u = ControlSequence::new(vec![vec![2.0, -2.0]]);
        let t = Trajectory::new(vec![vec![1.0, 1.0, 0.0, 0.0]]).unwrap();
        assert!(check_bounds(&m, &t, &u).is_empty());
    }

    fn controls(h: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), h)
    }

    proptest! {
        #[test]
        fn superposition(x0 in prop::collection::vec(-3.0f64..3.0, 4), u1 in controls(6), u2 in controls(6)) {
            let m = AgentModel::double_integrator();
            let sum: Vec<Vec<f64>> = u1.iter().zip(&u2).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
            let full = rollout(&m, &x0, &ControlSequence::new(sum)).unwrap();
            let free = rollout(&m, &x0, &ControlSequence::new(u1)).unwrap();
            let forced = rollout(&m, &[0.0; 4], &ControlSequence::new(u2)).unwrap();
            for k in 0..=6 {
                for i in 0..4 {
                    let lhs = full.state(k).unwrap()[i];
                    let rhs = free.state(k).unwrap()[i] + forced.state(k).unwrap()[i];
                    prop_assert!((lhs - rhs).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn time_invariance(u in controls(5)) {
            let m = AgentModel::double_integrator();
            let base = rollout(&m, &[0.0; 4], &ControlSequence::new(u.clone())).unwrap();
            let mut delayed = vec![vec![0.0, 0.0]];
            delayed.extend(u);
            let shifted = rollout(&m, &[0.0; 4], &ControlSequence::new(delayed)).unwrap();
            for k in 0..=5 {
                for i in 0..4 {
                    prop_assert!((base.state(k).unwrap()[i] - shifted.state(k + 1).unwrap()[i]).abs() < 1e-12);
                }
            }
        }
    }
}
