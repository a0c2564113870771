//! Certification reports and plot data.

use super::{all_settings, linear_inversion_tomography, plan_settings, poisson_mc, ErrorModel, ExpectationSource, MeasureError};
use crate::cert::{
    bell_result, fidelity_bound_gosg, fidelity_bound_id, fidelity_sg, noise_tolerance, witness_gamma_analytic,
    witness_value, AlphaSummary, CertReport, FidelityBound, FidelityMethod, FidelitySummary, GammaSource, IdSummary,
    Measured, WitnessSummary,
};
use crate::id::{find_ids_in_group, GroupId, IdFilter, IdTable};
use crate::pauli::PauliOperator;
use crate::stabilizer::{gf2_rank, state_stabilizer, StabilizerGroup};
use crate::state::QuantumState;

/// Inputs to [`certification_report`] besides the data.
#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// ID rows and eigenvalues; chosen with [`auto_select_id`] when absent.
    pub id: Option<(IdTable, Vec<i8>)>,
    pub target: Option<QuantumState>,
    pub target_label: Option<String>,
    /// Generators for the generator-set bound, signs included.
    pub gosg: Option<Vec<PauliOperator>>,
    /// Cached numeric `γ_C` values as `(class, γ)`.
    pub numeric_gammas: Vec<(String, f64)>,
    /// Error model used for the tomography fidelity; counts sources only.
    pub tomography_errors: Option<ErrorModel>,
}

/// Picks the ID to certify with: the largest whole negative critical ID the
/// source can measure, first in canonical order; failing that, the first
/// measurable entangled critical `ID(N+1)^N` with a one-dimensional eigenspace.
pub fn auto_select_id(group: &StabilizerGroup, source: &dyn ExpectationSource) -> Result<Option<GroupId>, MeasureError> {
    let n = group.n_qubits();
    let m_max = (n + 1).min(crate::id::MAX_SEARCH_ROWS);
    let measurable = |g: &GroupId| g.table.rows().iter().all(|r| source.expectation(r).is_ok());
    let strict = IdFilter { whole: true, negative: true, critical: true, entangled: true, ..IdFilter::default() };
    let mut found = find_ids_in_group(group, m_max, strict)?;
    found.retain(measurable);
    if let Some(best) = found.iter().map(|g| g.table.m()).max() {
        return Ok(found.into_iter().find(|g| g.table.m() == best));
    }
    let loose = IdFilter { entangled: true, critical: true, rows: Some(n + 1), ..IdFilter::default() };
    Ok(find_ids_in_group(group, m_max, loose)?
        .into_iter()
        .find(|g| g.classification.eigenspace_rank == 1 && measurable(g)))
}

/// `Σ c_i ⟨O_i⟩` with its error from the source.
fn combination(source: &dyn ExpectationSource, terms: &[(f64, PauliOperator)]) -> Result<Measured, MeasureError> {
    let mut value = 0.0;
    let mut missing = Vec::new();
    for (c, op) in terms {
        match source.expectation(op) {
            Ok(m) => value += c * m.value,
            Err(e) if e.is_coverage_gap() => missing.push(op.to_string()),
            Err(e) => return Err(e),
        }
    }
    if !missing.is_empty() {
        return Err(MeasureError::Coverage(missing));
    }
    Ok(Measured::new(value, source.combination_sigma(terms)?))
}

fn measured_all(source: &dyn ExpectationSource, ops: &[PauliOperator]) -> Result<Vec<Measured>, MeasureError> {
    let mut out = Vec::with_capacity(ops.len());
    let mut missing = Vec::new();
    for op in ops {
        match source.expectation(op) {
            Ok(m) => out.push(m),
            Err(e) if e.is_coverage_gap() => missing.push(op.to_string()),
            Err(e) => return Err(e),
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(MeasureError::Coverage(missing))
    }
}

/// Bell parameter, fidelity bounds, witnesses and noise tolerance for one ID.
pub fn certification_report(source: &dyn ExpectationSource, opts: &ReportOptions) -> Result<CertReport, MeasureError> {
    let n = source.n_qubits();
    let mut notes = Vec::new();
    let target_group = match &opts.target {
        Some(t) if t.n_qubits() != n => return Err(MeasureError::WidthMismatch { dataset: n, other: t.n_qubits() }),
        Some(t) => match state_stabilizer(t) {
            Ok(g) => Some(g),
            Err(e) => {
                notes.push(format!("target is not a stabilizer state ({e}); stabilizer-group bound skipped"));
                None
            }
        },
        None => None,
    };
    let (id, lambdas) = match &opts.id {
        Some((id, l)) => (id.clone(), l.clone()),
        None => {
            let group = target_group
                .as_ref()
                .ok_or_else(|| MeasureError::Invalid("no ID given and no stabilizer target to choose one from".into()))?;
            let g = auto_select_id(group, source)?
                .ok_or_else(|| MeasureError::Invalid("no measurable critical ID in the target group".into()))?;
            (g.table, g.lambdas)
        }
    };
    if id.n_qubits() != n {
        return Err(MeasureError::WidthMismatch { dataset: n, other: id.n_qubits() });
    }
    id.check_lambdas(&lambdas)?;
    let m = id.m();

    let terms: Vec<(f64, PauliOperator)> = id.rows().iter().zip(&lambdas).map(|(r, &l)| (l as f64, *r)).collect();
    let mut alpha = combination(source, &terms)?;
    if let Some(s) = source.alpha_sigma_override() {
        alpha.sigma = s;
        notes.push(format!("alpha error taken from the dataset: {s}"));
    }
    let bell = bell_result(&id, alpha.value, alpha.sigma);
    let f_id = fidelity_bound_id(alpha, m)?;

    let gosg_ops = opts.gosg.clone().or_else(|| source.gosg()).unwrap_or_else(|| {
        id.rows()[..m - 1].iter().zip(&lambdas).map(|(r, &l)| if l < 0 { r.negated() } else { *r }).collect()
    });
    let gosg = if gosg_ops.len() == n && gf2_rank(&gosg_ops) == n {
        match measured_all(source, &gosg_ops) {
            Ok(vals) => {
                let mut b = fidelity_bound_gosg(&vals)?;
                let half: Vec<(f64, PauliOperator)> = gosg_ops.iter().map(|g| (0.5, *g)).collect();
                b.sigma = source.combination_sigma(&half)?;
                Some(b)
            }
            Err(e) if e.is_coverage_gap() => {
                notes.push(format!("generator-set bound skipped: {e}"));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        notes.push("generator-set bound skipped: generators are not N independent operators".into());
        None
    };

    let sg = match &target_group {
        Some(g) => {
            let elems = g.elements().to_vec();
            match measured_all(source, &elems) {
                Ok(vals) => {
                    let mut b = fidelity_sg(&vals, n)?;
                    let w = 1.0 / elems.len() as f64;
                    let terms: Vec<(f64, PauliOperator)> =
                        elems.iter().filter(|e| !e.is_identity()).map(|e| (w, *e)).collect();
                    b.sigma = source.combination_sigma(&terms)?;
                    Some(b)
                }
                Err(e) if e.is_coverage_gap() => None,
                Err(e) => return Err(e),
            }
        }
        None => None,
    };

    let tomography = match (source.counts(), &opts.target) {
        (Some(d), Some(t)) if all_settings(n).iter().all(|s| d.has_setting(s)) && t.is_pure() => {
            let tomo = linear_inversion_tomography(d)?;
            let value = tomo.fidelity(t)?;
            notes.push(format!("tomography: linear inversion, minimum eigenvalue {:.4}", tomo.min_eigenvalue));
            let sigma = match opts.tomography_errors.unwrap_or(ErrorModel::PoissonMc { cycles: super::DEFAULT_MC_CYCLES, seed: 0 }) {
                ErrorModel::PoissonMc { cycles, seed } => {
                    poisson_mc(d, |x| Ok(linear_inversion_tomography(x)?.fidelity(t)?), cycles, seed)?.sigma
                }
                ErrorModel::Binomial => {
                    notes.push("tomography error bar not computed under the binomial model".into());
                    0.0
                }
            };
            Some(FidelityBound::new(FidelityMethod::Tomography, value, sigma))
        }
        _ => None,
    };

    let mut witnesses = Vec::new();
    let analytic = if id.eigenspace_rank() == 1 {
        let w = witness_gamma_analytic(&id, &lambdas)?;
        let v = witness_value(w.gamma, alpha);
        witnesses.push(WitnessSummary {
            class: w.class_label.clone(),
            gamma: w.gamma,
            source: GammaSource::AnalyticBipartition,
            value: v.value,
            sigma: v.sigma,
        });
        Some(w.gamma)
    } else {
        notes.push(format!("eigenspace rank {}; no analytic biseparable bound", id.eigenspace_rank()));
        None
    };
    for (class, gamma) in &opts.numeric_gammas {
        let v = witness_value(*gamma, alpha);
        witnesses.push(WitnessSummary {
            class: class.clone(),
            gamma: *gamma,
            source: GammaSource::Numeric,
            value: v.value,
            sigma: v.sigma,
        });
    }
    let gamma_nt = analytic
        .or_else(|| opts.numeric_gammas.iter().map(|g| g.1).reduce(f64::max))
        .unwrap_or_else(|| {
            notes.push("noise tolerance computed against the hidden-variable bound M - 2".into());
            m as f64 - 2.0
        });
    let tolerance = noise_tolerance(m, gamma_nt, id.eigenspace_rank())?;

    Ok(CertReport {
        state: opts.target_label.clone().unwrap_or_else(|| source.label()),
        id: IdSummary::new(&id, &lambdas),
        alpha: AlphaSummary::from(&bell),
        fidelity: FidelitySummary { id: f_id, gosg, sg, tomography },
        witnesses,
        noise_tolerance: tolerance,
        min_settings: plan_settings(id.rows())?,
        notes,
    })
}

/// Bar-chart data: `observable,value,sigma,ideal`; `ideal` is blank without a target.
pub fn expectation_plot_csv(
    source: &dyn ExpectationSource,
    ops: &[PauliOperator],
    target: Option<&QuantumState>,
) -> Result<String, MeasureError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["observable", "value", "sigma", "ideal"])?;
    for op in ops {
        let m = source.expectation(op)?;
        let ideal = match target {
            Some(t) => format!("{:.6}", t.expectation(op)?),
            None => String::new(),
        };
        w.write_record([op.to_string(), format!("{:.6}", m.value), format!("{:.6}", m.sigma), ideal])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("ascii csv"))
}

/// Fidelity-method comparison: `method,value,sigma,clamped`.
pub fn fidelity_plot_csv(report: &CertReport) -> Result<String, MeasureError> {
    let f = &report.fidelity;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "value", "sigma", "clamped"])?;
    for b in [Some(&f.id), f.gosg.as_ref(), f.sg.as_ref(), f.tomography.as_ref()].into_iter().flatten() {
        let method = serde_json::to_value(b.method)?.as_str().unwrap_or_default().to_string();
        w.write_record([method, format!("{:.6}", b.value), format!("{:.6}", b.sigma), format!("{:.6}", b.clamped)])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("ascii csv"))
}
