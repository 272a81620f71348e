//! End-to-end loop: queue of pending goals with a dedup seen-set,
//! decompose-or-direct per goal, backend discharge, fragment assembly,
//! plus the exact numeric verification oracle and batch reporting.

mod backend;
mod config;

pub use backend::{
    extract_lean_block, proof_lint, BackendOutcome, DischargeRequest, HttpBackend,
    HttpBackendConfig, NullBackend, ProverBackend,
};
pub use config::{Config, EngineConfig};

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::leanemit::{
    assemble, emit_direct, emit_lean, goal_id, lint_statement, write_manifest, LeanSketchFile,
    Manifest,
};
use crate::parser::{parse_identity, print_identity, rhs_at, sum_at, Identity, REC_VAR};
use crate::sketch::{build_sketch, ObligationKind, ObligationStatus, ProofSketch};
use crate::symcore::{rat_int, render_rat, Rat};

// ---------------------------------------------------------------------------
// Goal queue (sketch-guided proving loop semantics)
// ---------------------------------------------------------------------------

/// FIFO of pending obligations with a seen-set: no goal is processed twice,
/// and every processed goal either resolves or enqueues strictly new goals.
#[derive(Default)]
pub struct GoalQueue {
    pending: VecDeque<QueuedGoal>,
    seen: HashSet<String>,
    /// verified proof text per discharged goal id
    pub fragments: BTreeMap<String, String>,
    pub duplicates_skipped: usize,
}

#[derive(Clone, Debug)]
pub enum QueuedGoal {
    Obligation {
        id: String,
        request: DischargeRequest,
        branch: Option<String>,
    },
    Identity {
        name: String,
        source: String,
    },
}

impl GoalQueue {
    pub fn push(&mut self, goal: QueuedGoal) -> bool {
        let key = match &goal {
            QueuedGoal::Obligation { id, .. } => id.clone(),
            QueuedGoal::Identity { source, .. } => goal_id(source),
        };
        if self.seen.contains(&key) {
            self.duplicates_skipped += 1;
            return false;
        }
        self.seen.insert(key);
        self.pending.push_back(goal);
        true
    }

    pub fn pop(&mut self) -> Option<QueuedGoal> {
        self.pending.pop_front()
    }

    pub fn seen_count(&self) -> usize {
        self.seen.len()
    }
}

// ---------------------------------------------------------------------------
// Numeric verification oracle
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub enum PointStatus {
    Equal,
    Unequal,
    SkippedPole,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointResult {
    pub n: i64,
    pub params: BTreeMap<String, i64>,
    pub status: PointStatus,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NumericReport {
    pub checked: usize,
    pub equal: usize,
    pub unequal: usize,
    pub skipped: usize,
    pub pass: bool,
    pub failures: Vec<PointResult>,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub n_max: i64,
    pub param_min: i64,
    pub param_max: i64,
    /// Fault-injection offset added to the right-hand side; the negative
    /// control for the oracle itself.
    pub rhs_offset: Rat,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_max: 20,
            param_min: 1,
            param_max: 5,
            rhs_offset: rat_int(0),
        }
    }
}

/// Exact LHS-vs-RHS comparison for all admissible n <= n_max and sampled
/// parameter values; poles are skipped and reported, never silently passed.
pub fn numeric_verify(id: &Identity, opts: &VerifyOptions) -> NumericReport {
    let mut report = NumericReport {
        checked: 0,
        equal: 0,
        unequal: 0,
        skipped: 0,
        pass: true,
        failures: Vec::new(),
    };
    let samples = param_samples(id, opts);
    for n in 0..=opts.n_max {
        for params in &samples {
            let mut outer: BTreeMap<String, Rat> = BTreeMap::new();
            outer.insert(REC_VAR.to_string(), rat_int(n));
            for (p, v) in params {
                outer.insert(p.clone(), rat_int(*v));
            }
            let admissible = id
                .assumptions
                .iter()
                .all(|a| a.holds(&outer).unwrap_or(false));
            if !admissible {
                continue;
            }
            report.checked += 1;
            let lhs = sum_at(id, &outer);
            let rhs = rhs_at(id, &outer).map(|r| r + opts.rhs_offset.clone());
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => {
                    if l == r {
                        report.equal += 1;
                    } else {
                        report.unequal += 1;
                        report.pass = false;
                        if report.failures.len() < 16 {
                            report.failures.push(PointResult {
                                n,
                                params: params.clone(),
                                status: PointStatus::Unequal,
                                detail: Some(format!(
                                    "lhs = {}, rhs = {}",
                                    render_rat(&l),
                                    render_rat(&r)
                                )),
                            });
                        }
                    }
                }
                (l, r) => {
                    report.skipped += 1;
                    let detail = l.err().or(r.err()).map(|e| e.to_string());
                    if report.failures.len() < 16 {
                        report.failures.push(PointResult {
                            n,
                            params: params.clone(),
                            status: PointStatus::SkippedPole,
                            detail,
                        });
                    }
                }
            }
        }
    }
    report
}

fn param_samples(id: &Identity, opts: &VerifyOptions) -> Vec<BTreeMap<String, i64>> {
    let mut out: Vec<BTreeMap<String, i64>> = vec![BTreeMap::new()];
    for p in &id.params {
        let mut next = Vec::new();
        for base in &out {
            for v in opts.param_min..=opts.param_max {
                let mut m = base.clone();
                m.insert(p.clone(), v);
                next.push(m);
            }
        }
        out = next;
        if out.len() > 4096 {
            out.truncate(4096);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Batch pipeline
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Default)]
pub struct BackendStats {
    pub attempts: usize,
    pub successes: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObligationCounts {
    pub rec: usize,
    pub bd: usize,
    pub side: usize,
    pub norm: usize,
    pub case: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub file: Option<String>,
    pub covered: bool,
    pub certificate: Option<String>,
    pub relation_order: Option<u32>,
    pub obligations: Option<ObligationCounts>,
    pub open: usize,
    pub discharged: usize,
    pub numeric: Option<NumericReport>,
    pub backend: BackendStats,
    pub status: String,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Default)]
pub struct BatchTotals {
    pub identities: usize,
    pub covered: usize,
    pub failed: usize,
    pub obligations: usize,
    pub discharged: usize,
    pub duplicates_skipped: usize,
    pub goals_seen: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BatchReport {
    pub identities: Vec<IdentityReport>,
    pub totals: BatchTotals,
}

impl BatchReport {
    pub fn all_pass(&self) -> bool {
        self.identities.iter().all(|r| r.status == "ok")
    }
}

pub struct EmittedFiles {
    pub lean_path: PathBuf,
    pub manifest_path: PathBuf,
}

fn counts(sk: &ProofSketch) -> ObligationCounts {
    ObligationCounts {
        rec: sk.count_kind(ObligationKind::Rec),
        bd: sk.count_kind(ObligationKind::Bd),
        side: sk.count_kind(ObligationKind::Side),
        norm: sk.count_kind(ObligationKind::Norm),
        case: sk.count_kind(ObligationKind::Case),
    }
}

/// Fully process one identity source: sketch, numeric check, backend pass
/// over obligations (with the shared dedup queue), emission and assembly.
#[allow(clippy::too_many_arguments)]
fn process_identity(
    name: &str,
    source: &str,
    file: Option<&Path>,
    config: &Config,
    backend: &dyn ProverBackend,
    queue: &Mutex<GoalQueue>,
    out_dir: Option<&Path>,
    sub_goals: &mut Vec<QueuedGoal>,
) -> IdentityReport {
    let mut report = IdentityReport {
        name: name.to_string(),
        file: file.map(|p| p.display().to_string()),
        covered: false,
        certificate: None,
        relation_order: None,
        obligations: None,
        open: 0,
        discharged: 0,
        numeric: None,
        backend: BackendStats::default(),
        status: "ok".to_string(),
        error: None,
        warnings: Vec::new(),
    };
    let id = match parse_identity(source) {
        Ok(id) => id,
        Err(e) => {
            report.status = "fail".to_string();
            report.error = Some(e.to_string());
            return report;
        }
    };
    let mut sk = match build_sketch(&id, config.engine.max_order) {
        Ok(sk) => sk,
        Err(e) => {
            report.status = "fail".to_string();
            report.error = Some(e.to_string());
            return report;
        }
    };
    report.covered = !sk.uncovered;
    report.certificate = sk.relation.as_ref().map(|r| r.certificate().render());
    report.relation_order = sk.relation.as_ref().map(|r| r.order());
    report.warnings = sk.warnings.clone();

    let opts = VerifyOptions {
        n_max: config.engine.n_max,
        param_min: config.engine.param_min,
        param_max: config.engine.param_max,
        rhs_offset: rat_int(0),
    };
    let numeric = numeric_verify(&id, &opts);
    if !numeric.pass {
        report.status = "fail".to_string();
        report.error = Some("numeric verification found a counterexample".to_string());
    }
    report.numeric = Some(numeric);

    if sk.uncovered {
        // direct-prove fallback
        let req = DischargeRequest {
            goal_lean: crate::leanemit::lean_statement(&id),
            goal_internal: print_identity(&id),
            identity: print_identity(&id),
            certificate: None,
        };
        let fresh = queue.lock().unwrap().push(QueuedGoal::Identity {
            name: name.to_string(),
            source: source.to_string(),
        });
        let mut direct_proof: Option<String> = None;
        if fresh {
            report.backend.attempts += 1;
            match backend.discharge(&req) {
                BackendOutcome::Proved(proof) if proof_lint(&proof).is_ok() => {
                    report.backend.successes += 1;
                    direct_proof = Some(proof);
                }
                BackendOutcome::Proved(_) | BackendOutcome::Failed(_) => {
                    report.backend.failures += 1;
                }
            }
        }
        if direct_proof.is_none() {
            report.status = "fail".to_string();
            report
                .error
                .get_or_insert_with(|| "uncovered identity; direct proof failed".to_string());
        }
        // a direct stub is emitted either way
        let lean = emit_direct(&sk.identity, name, &config.lean);
        let lean = if let Some(proof) = direct_proof {
            let key = lean.placeholder_map.keys().next().cloned().unwrap();
            let mut frags = BTreeMap::new();
            frags.insert(key, proof);
            report.discharged = 1;
            assemble(&lean, &frags).unwrap_or(lean)
        } else {
            report.open = 1;
            lean
        };
        if let Err(e) = lint_statement(&lean.text) {
            report.warnings.push(format!("lint: {}", e));
        }
        if let Some(dir) = out_dir {
            if let Err(e) = write_outputs(dir, name, &lean, &write_manifest(&sk)) {
                report.status = "fail".to_string();
                report.error = Some(e.to_string());
            }
        }
        return report;
    }

    // covered: enqueue obligations, consult the backend on fresh ones
    let mut discharges: BTreeMap<String, String> = BTreeMap::new();
    for ob in sk.obligations.clone() {
        let req = DischargeRequest {
            goal_lean: ob.goal_lean.clone(),
            goal_internal: ob.goal_internal.clone(),
            identity: print_identity(&id),
            certificate: report.certificate.clone(),
        };
        let goal = QueuedGoal::Obligation {
            id: ob.id.clone(),
            request: req.clone(),
            branch: ob.branch.clone(),
        };
        let fresh = queue.lock().unwrap().push(goal);
        if !fresh {
            // already processed elsewhere in the batch: reuse any fragment
            if let Some(proof) = queue.lock().unwrap().fragments.get(&ob.id) {
                discharges.insert(ob.id.clone(), proof.clone());
            }
            continue;
        }
        if let Some(branch) = &ob.branch {
            sub_goals.push(QueuedGoal::Identity {
                name: format!(
                    "{}#{}",
                    name,
                    if branch.contains("case even") {
                        "even"
                    } else {
                        "odd"
                    }
                ),
                source: branch.clone(),
            });
        }
        report.backend.attempts += 1;
        match backend.discharge(&req) {
            BackendOutcome::Proved(proof) if proof_lint(&proof).is_ok() => {
                report.backend.successes += 1;
                discharges.insert(ob.id.clone(), proof.clone());
                queue.lock().unwrap().fragments.insert(ob.id.clone(), proof);
            }
            BackendOutcome::Proved(_) | BackendOutcome::Failed(_) => {
                report.backend.failures += 1;
            }
        }
    }
    for ob in sk.obligations.iter_mut() {
        if discharges.contains_key(&ob.id) {
            ob.status = ObligationStatus::Discharged;
        }
    }
    report.discharged = discharges.len();
    report.open = sk.obligations.len() - discharges.len();
    report.obligations = Some(counts(&sk));

    match emit_lean(&sk, name, &config.lean, &discharges) {
        Ok(lean) => {
            if let Err(e) = lint_statement(&lean.text) {
                report.warnings.push(format!("lint: {}", e));
            }
            if let Some(dir) = out_dir {
                if let Err(e) = write_outputs(dir, name, &lean, &write_manifest(&sk)) {
                    report.status = "fail".to_string();
                    report.error = Some(e.to_string());
                }
            }
        }
        Err(e) => {
            report.status = "fail".to_string();
            report.error = Some(e.to_string());
        }
    }
    report
}

fn write_outputs(
    dir: &Path,
    name: &str,
    lean: &LeanSketchFile,
    manifest: &Manifest,
) -> Result<EmittedFiles> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Invalid(format!("cannot create {}: {}", dir.display(), e)))?;
    let stem: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    let lean_path = dir.join(format!("{}.lean", stem));
    let manifest_path = dir.join(format!("{}.manifest.json", stem));
    std::fs::write(&lean_path, &lean.text)
        .map_err(|e| Error::Invalid(format!("cannot write {}: {}", lean_path.display(), e)))?;
    std::fs::write(&manifest_path, manifest.to_json())
        .map_err(|e| Error::Invalid(format!("cannot write {}: {}", manifest_path.display(), e)))?;
    Ok(EmittedFiles {
        lean_path,
        manifest_path,
    })
}

/// Run the full pipeline over identity files. Per-identity failures are
/// isolated: one bad input never alters another identity's outputs.
pub fn run_pipeline(
    inputs: &[PathBuf],
    config: &Config,
    backend: &dyn ProverBackend,
    out_dir: Option<&Path>,
) -> BatchReport {
    let queue = Mutex::new(GoalQueue::default());
    let n = inputs.len();
    let jobs = config.engine.jobs.max(1).min(n.max(1));
    let results: Mutex<Vec<Option<IdentityReport>>> = Mutex::new(vec![None; n]);
    let extra_goals: Mutex<Vec<QueuedGoal>> = Mutex::new(Vec::new());
    let next: Mutex<usize> = Mutex::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().unwrap();
                    if *guard >= n {
                        break;
                    }
                    let i = *guard;
                    *guard += 1;
                    i
                };
                let path = &inputs[idx];
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().to_string())
                    .unwrap_or_else(|| format!("identity{}", idx));
                let mut subs = Vec::new();
                let report = match std::fs::read_to_string(path) {
                    Ok(source) => process_identity(
                        &name,
                        &source,
                        Some(path),
                        config,
                        backend,
                        &queue,
                        out_dir,
                        &mut subs,
                    ),
                    Err(e) => IdentityReport {
                        name: name.clone(),
                        file: Some(path.display().to_string()),
                        covered: false,
                        certificate: None,
                        relation_order: None,
                        obligations: None,
                        open: 0,
                        discharged: 0,
                        numeric: None,
                        backend: BackendStats::default(),
                        status: "fail".to_string(),
                        error: Some(format!("cannot read {}: {}", path.display(), e)),
                        warnings: Vec::new(),
                    },
                };
                extra_goals.lock().unwrap().extend(subs);
                results.lock().unwrap()[idx] = Some(report);
            });
        }
    });
    let mut reports: Vec<IdentityReport> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every input produces a report"))
        .collect();
    // parity branches queued during sketching become independent tasks;
    // case-tagged identities never re-split, so this loop terminates
    let extra = extra_goals.into_inner().unwrap();
    for goal in extra {
        if let QueuedGoal::Identity { name, source } = goal {
            let mut subs = Vec::new();
            let report = process_identity(
                &name, &source, None, config, backend, &queue, out_dir, &mut subs,
            );
            reports.push(report);
        }
    }
    let q = queue.into_inner().unwrap();
    let totals = BatchTotals {
        identities: reports.len(),
        covered: reports.iter().filter(|r| r.covered).count(),
        failed: reports.iter().filter(|r| r.status != "ok").count(),
        obligations: reports.iter().map(|r| r.open + r.discharged).sum(),
        discharged: reports.iter().map(|r| r.discharged).sum(),
        duplicates_skipped: q.duplicates_skipped,
        goals_seen: q.seen_count(),
    };
    BatchReport {
        identities: reports,
        totals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CENTRAL: &str = "sum(k, 0, n, binom(n,k)^2) = binom(2*n,n)";

    #[test]
    fn numeric_oracle_passes_and_negative_control_fails() {
        let id = parse_identity(CENTRAL).unwrap();
        let opts = VerifyOptions {
            n_max: 12,
            ..Default::default()
        };
        let rep = numeric_verify(&id, &opts);
        assert!(rep.pass);
        assert_eq!(rep.unequal, 0);
        assert_eq!(rep.checked, 13);
        let corrupted = VerifyOptions {
            n_max: 3,
            rhs_offset: rat_int(1),
            ..Default::default()
        };
        let rep = numeric_verify(&id, &corrupted);
        assert!(!rep.pass);
        assert_eq!(rep.failures[0].n, 0);
    }

    #[test]
    fn queue_dedups_goals() {
        let mut q = GoalQueue::default();
        let req = DischargeRequest {
            goal_lean: "g".into(),
            goal_internal: "g".into(),
            identity: "i".into(),
            certificate: None,
        };
        assert!(q.push(QueuedGoal::Obligation {
            id: "abc".into(),
            request: req.clone(),
            branch: None,
        }));
        assert!(!q.push(QueuedGoal::Obligation {
            id: "abc".into(),
            request: req,
            branch: None,
        }));
        assert_eq!(q.duplicates_skipped, 1);
        assert!(q.pop().is_some());
        assert!(q.pop().is_none());
    }
}
