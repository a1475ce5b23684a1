//! The trajectory table: `agent,k,<states>,<controls>`, one row per agent
//! and step, with the control cells blank at the final step.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dynamics::{AgentModel, ControlSequence, DynamicsError, TeamTrajectory, Trajectory};
use crate::spec::{AgentId, Fleet};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("trace/fleet mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

fn num(v: &f64) -> String {
    if *v == 0.0 {
        "0".into()
    } else {
        v.to_string()
    }
}

/// Column names shared by every agent's model, or `x0..`/`u0..` when the
/// models disagree.
fn columns(fleet: &Fleet, models: &BTreeMap<AgentId, AgentModel>) -> (Vec<String>, Vec<String>) {
    let ms: Vec<&AgentModel> = fleet.agents.iter().filter_map(|a| models.get(&a.id)).collect();
    let Some(first) = ms.first() else {
        return (vec![], vec![]);
    };
    if ms.iter().all(|m| m.state_names() == first.state_names() && m.control_names() == first.control_names()) {
        return (first.state_names().to_vec(), first.control_names().to_vec());
    }
    let nx = ms.iter().map(|m| m.nx()).max().unwrap_or(0);
    let nu = ms.iter().map(|m| m.nu()).max().unwrap_or(0);
    ((0..nx).map(|i| format!("x{i}")).collect(), (0..nu).map(|i| format!("u{i}")).collect())
}

pub fn write_traces(
    fleet: &Fleet,
    models: &BTreeMap<AgentId, AgentModel>,
    team: &TeamTrajectory,
    controls: &BTreeMap<AgentId, ControlSequence>,
) -> Result<String, TraceError> {
    let (xs, us) = columns(fleet, models);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["agent".to_string(), "k".to_string()];
    header.extend(xs.iter().cloned());
    header.extend(us.iter().cloned());
    w.write_record(&header)?;
    for agent in &fleet.agents {
        let traj = team
            .agent(agent.id)
            .ok_or_else(|| TraceError::Mismatch(format!("no trajectory for agent {}", agent.id)))?;
        let u = controls.get(&agent.id);
        for (k, x) in traj.states().iter().enumerate() {
            let mut row = vec![agent.id.to_string(), k.to_string()];
            row.extend((0..xs.len()).map(|i| x.get(i).map_or(String::new(), num)));
            let uk = u.and_then(|u| u.controls().get(k));
            row.extend((0..us.len()).map(|i| uk.and_then(|r| r.get(i)).map_or(String::new(), num)));
            w.write_record(&row)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| TraceError::Mismatch(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads the state columns back. Control columns are ignored.
pub fn read_traces(text: &str, fleet: &Fleet, models: &BTreeMap<AgentId, AgentModel>) -> Result<TeamTrajectory, TraceError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.get(0) != Some("agent") || header.get(1) != Some("k") {
        return Err(TraceError::Mismatch("header must start with `agent,k`".into()));
    }
    let mut rows: BTreeMap<AgentId, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| TraceError::Row { line, message };
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let agent: AgentId = field(0).parse().map_err(|_| bad(format!("bad agent id {:?}", field(0))))?;
        let k: usize = field(1).parse().map_err(|_| bad(format!("bad step {:?}", field(1))))?;
        let model = models
            .get(&agent)
            .ok_or_else(|| TraceError::Mismatch(format!("agent {agent} is not in the fleet")))?;
        let x = (0..model.nx())
            .map(|i| {
                let s = field(2 + i);
                s.parse::<f64>().map_err(|_| bad(format!("bad state value {s:?} in column {}", 3 + i)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if rows.entry(agent).or_default().insert(k, x).is_some() {
            return Err(bad(format!("duplicate row for agent {agent} at step {k}")));
        }
    }
    let mut trajectories = Vec::new();
    for a in &fleet.agents {
        let steps = rows
            .remove(&a.id)
            .ok_or_else(|| TraceError::Mismatch(format!("no rows for agent {}", a.id)))?;
        if let Some((k, _)) = steps.iter().enumerate().find(|(i, (k, _))| *i != **k) {
            return Err(TraceError::Mismatch(format!("agent {}: steps are not contiguous from 0 (missing {k})", a.id)));
        }
        trajectories.push(Trajectory::new(steps.into_values().collect())?);
    }
    if let Some(extra) = rows.keys().next() {
        return Err(TraceError::Mismatch(format!("agent {extra} is not in the fleet")));
    }
    Ok(TeamTrajectory::new(trajectories)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rollout;
    use crate::spec::Agent;

    fn fleet() -> (Fleet, BTreeMap<AgentId, AgentModel>) {
        let agents = (1..=2)
            .map(|id| Agent { id, capabilities: Default::default(), model: "double_integrator".into(), x0: vec![id as f64, 1.0, 0.0, 0.0] })
            .collect();
        let fleet = Fleet::new(Default::default(), agents).unwrap();
        let models = (1..=2).map(|id| (id, AgentModel::double_integrator())).collect();
        (fleet, models)
    }

    #[test]
    fn round_trip_is_exact() {
        let (fleet, models) = fleet();
        let mut team = Vec::new();
        let mut controls = BTreeMap::new();
        for a in &fleet.agents {
            let u = ControlSequence::new(vec![vec![0.1, -1.0 / 3.0], vec![1e-9, 0.7]]);
            team.push(rollout(&models[&a.id], &a.x0, &u).unwrap());
            controls.insert(a.id, u);
        }
        let team = TeamTrajectory::new(team).unwrap();
        let text = write_traces(&fleet, &models, &team, &controls).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("agent,k,zx,zy,vx,vy,ux,uy"));
        assert!(text.lines().nth(3).unwrap().ends_with(",,"), "controls blank at k = H");
        assert_eq!(read_traces(&text, &fleet, &models).unwrap(), team);
    }

    #[test]
    fn mismatches_are_reported() {
        let (fleet, models) = fleet();
        let text = "agent,k,zx,zy,vx,vy,ux,uy\n1,0,1,1,0,0,,\n";
        assert!(matches!(read_traces(text, &fleet, &models), Err(TraceError::Mismatch(_))));
        let text = "agent,k,zx,zy,vx,vy\n1,0,1,1,0,0\n2,0,1,1,0,0\n3,0,1,1,0,0\n";
        assert!(read_traces(text, &fleet, &models).unwrap_err().to_string().contains("agent 3"));
        let text = "agent,k,zx,zy,vx,vy\n1,0,1,1,0,0\n1,2,1,1,0,0\n2,0,1,1,0,0\n2,1,1,1,0,0\n";
        assert!(read_traces(text, &fleet, &models).is_err());
        let text = "agent,k,zx,zy,vx,vy\n1,0,1,x,0,0\n";
        assert!(matches!(read_traces(text, &fleet, &models), Err(TraceError::Row { line: 2, .. })));
    }
}
