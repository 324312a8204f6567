use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::combinatorics::DEFAULT_VARIABLE_CAP;
use crate::conic::SolverSettings;
use crate::distributions::{NormKind, TransportCost};
use crate::error::{Error, Result};
use crate::program::{sweep_outer, sweep_relaxation, unstructured_value};

use super::catalog;
use super::reference::{reference_cases, reference_value};

/// Comparison tolerance for solver-produced golden values.
pub const FIXTURE_TOLERANCE: f64 = 1e-6;

pub const REFERENCE_RADII: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub case: String,
    pub rho: f64,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixtures {
    pub tolerance: f64,
    pub entries: Vec<FixtureEntry>,
}

impl Fixtures {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixtures serialize")
    }

    pub fn find(&self, case: &str, rho: f64, m: Option<usize>) -> Option<&FixtureEntry> {
        self.entries
            .iter()
            .find(|e| e.case == case && e.rho == rho && e.m == m)
    }
}

/// Recomputes every golden value: the closed forms on a grid of radii and
/// lifting levels, the two-plane relaxation curve and baseline, and the
/// outer decision sweep.
pub fn generate_fixtures(settings: &SolverSettings<f64>, jobs: usize) -> Result<Fixtures> {
    let mut entries = Vec::new();
    for case in reference_cases() {
        let ms: Vec<Option<usize>> = if case.uses_m {
            (2..=6).map(Some).collect()
        } else {
            vec![None]
        };
        for &rho in &REFERENCE_RADII {
            for &m in &ms {
                let value = reference_value(&case, rho, m.unwrap_or(2))?;
                if value.is_finite() {
                    entries.push(FixtureEntry {
                        case: case.name(),
                        rho,
                        m,
                        value,
                        theta: None,
                    });
                }
            }
        }
    }

    for rho in [0.0, 0.2] {
        let inst = catalog::two_plane(rho)?;
        let top = if rho == 0.0 { 5 } else { 16 };
        let ms: Vec<usize> = (2..=top).collect();
        let curve = sweep_relaxation(&inst, &ms, settings, DEFAULT_VARIABLE_CAP, jobs)?;
        for p in &curve.points {
            let value = p
                .value
                .ok_or_else(|| Error::SolverFailure(format!("relaxation failed at M = {}", p.m)))?;
            entries.push(FixtureEntry {
                case: "two_plane/UMsym".into(),
                rho,
                m: Some(p.m),
                value,
                theta: None,
            });
        }
        entries.push(FixtureEntry {
            case: "two_plane/U".into(),
            rho,
            m: None,
            value: unstructured_value(&inst, settings, DEFAULT_VARIABLE_CAP)?.value,
            theta: None,
        });
    }

    let ms: Vec<usize> = (2..=8).collect();
    let outer = sweep_outer(
        &catalog::outer_decision_loss(),
        &catalog::outer_decision_nominal(),
        catalog::OUTER_DECISION_RADIUS,
        &TransportCost::new(NormKind::L2, 1),
        &ms,
        settings,
        DEFAULT_VARIABLE_CAP,
        jobs,
    )?;
    for p in &outer.points {
        let value = p
            .value
            .ok_or_else(|| Error::SolverFailure(format!("outer program failed at M = {}", p.m)))?;
        entries.push(FixtureEntry {
            case: "outer_decision/psi".into(),
            rho: catalog::OUTER_DECISION_RADIUS,
            m: Some(p.m),
            value,
            theta: p.theta.first().copied(),
        });
        if let Some(proxy) = p.proxy {
            entries.push(FixtureEntry {
                case: "outer_decision/proxy".into(),
                rho: catalog::OUTER_DECISION_RADIUS,
                m: Some(p.m),
                value: proxy,
                theta: None,
            });
        }
    }
    Ok(Fixtures {
        tolerance: FIXTURE_TOLERANCE,
        entries,
    })
}
