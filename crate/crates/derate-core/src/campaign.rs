//! Statistical fault-injection campaigns.
//!
//! A campaign flips every targeted flip-flop at randomly drawn cycles inside
//! the stimulus' active window, reruns the simulation and classifies each
//! run against the golden trace:
//!
//! * **output failure**: any primary output differs from the golden trace at
//!   or after the injection cycle;
//! * **application failure**: the sequence of payload words accepted under
//!   the valid strobe differs, which catches both corrupted and missing or
//!   spurious words.
//!
//! An application failure always counts as an output failure too, so the
//! per-flip-flop failure counts are nested by construction. The two failure
//! ratios per flip-flop are the de-rating figures the regression models are
//! later trained on.
//!
//! Injection cycles are drawn from one ChaCha stream per flip-flop, keyed by
//! the flip-flop's index. The planned cycles, and therefore the whole
//! campaign, do not depend on target order or worker scheduling.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{FfId, Netlist};
use crate::rng::{next_below, stream_rng, STREAM_CAMPAIGN};
use crate::sim::{simulate, Fault, SimError, Stimulus, Trace};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("checker signal `{net}` is not a primary output")]
    CheckerSignal { net: String },
    #[error("checker payload must have 1 to 64 signals, got {got}")]
    PayloadWidth { got: usize },
    #[error("campaign needs at least one injection per flip-flop")]
    ZeroInjections,
    #[error("flip-flop `{ff}` is targeted twice")]
    DuplicateTarget { ff: String },
    #[error("golden run failed: {source}")]
    GoldenRun {
        #[source]
        source: SimError,
    },
    #[error("injection run on `{ff}` at cycle {cycle} failed: {source}")]
    RunFailed {
        ff: String,
        cycle: u32,
        #[source]
        source: SimError,
    },
    #[error("traces are not comparable: {reason}")]
    TraceMismatch { reason: String },
    #[error("de-rating table line {line}: {reason}")]
    MalformedTable { line: usize, reason: String },
}

/// Names the primary outputs that carry the application protocol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckerConfig {
    /// Payload word, most significant signal last.
    pub payload: Vec<String>,
    /// Strobe: a payload word is accepted in every cycle this output is 1.
    pub valid: String,
}

impl CheckerConfig {
    pub fn resolve(&self, net: &Netlist) -> Result<ResolvedChecker, CampaignError> {
        if self.payload.is_empty() || self.payload.len() > 64 {
            return Err(CampaignError::PayloadWidth {
                got: self.payload.len(),
            });
        }
        let position = |name: &str| -> Result<usize, CampaignError> {
            net.find_net(name)
                .and_then(|id| net.outputs().iter().position(|&o| o == id))
                .ok_or_else(|| CampaignError::CheckerSignal {
                    net: name.to_string(),
                })
        };
        let mut payload_bits = Vec::with_capacity(self.payload.len());
        for name in &self.payload {
            payload_bits.push(position(name)?);
        }
        Ok(ResolvedChecker {
            payload_bits,
            valid_bit: position(&self.valid)?,
        })
    }
}

/// Checker signals resolved to trace bit positions.
#[derive(Clone, Debug)]
pub struct ResolvedChecker {
    payload_bits: Vec<usize>,
    valid_bit: usize,
}

impl ResolvedChecker {
    /// Payload words accepted by the valid strobe over the whole trace.
    pub fn accepted_words(&self, trace: &Trace) -> Vec<u64> {
        let mut words = Vec::new();
        for t in 0..trace.cycles() {
            if trace.get(t, self.valid_bit) {
                let mut word = 0u64;
                for (k, &bit) in self.payload_bits.iter().enumerate() {
                    word |= (trace.get(t, bit) as u64) << k;
                }
                words.push(word);
            }
        }
        words
    }
}

/// Outcome of one injection run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    NoFailure,
    /// Outputs diverged but the accepted payload sequence survived.
    OutputOnly,
    /// The accepted payload sequence changed; counted as an output failure
    /// as well.
    OutputAndApplication,
}

pub fn classify_run(
    golden: &Trace,
    faulty: &Trace,
    checker: &ResolvedChecker,
    injection_cycle: u32,
) -> Result<Classification, CampaignError> {
    if golden.width() != faulty.width() || golden.cycles() != faulty.cycles() {
        return Err(CampaignError::TraceMismatch {
            reason: format!(
                "golden is {}x{}, faulty is {}x{}",
                golden.cycles(),
                golden.width(),
                faulty.cycles(),
                faulty.width()
            ),
        });
    }
    if injection_cycle >= golden.cycles() {
        return Err(CampaignError::TraceMismatch {
            reason: format!(
                "injection cycle {injection_cycle} is outside the {}-cycle trace",
                golden.cycles()
            ),
        });
    }
    let output_failed =
        (injection_cycle..golden.cycles()).any(|t| golden.row(t) != faulty.row(t));
    if !output_failed {
        return Ok(Classification::NoFailure);
    }
    if checker.accepted_words(golden) != checker.accepted_words(faulty) {
        Ok(Classification::OutputAndApplication)
    } else {
        Ok(Classification::OutputOnly)
    }
}

/// Injection schedule: which flip-flops to hit and at which cycles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignPlan {
    injections: Vec<(FfId, Vec<u32>)>,
}

impl CampaignPlan {
    /// Draws `injections_per_ff` cycles per target uniformly from the active
    /// window, with replacement. Targets default to every flip-flop.
    pub fn random(
        net: &Netlist,
        stim: &Stimulus,
        injections_per_ff: u32,
        seed: u64,
        targets: Option<&[FfId]>,
    ) -> Result<CampaignPlan, CampaignError> {
        if injections_per_ff == 0 {
            return Err(CampaignError::ZeroInjections);
        }
        let targets = check_targets(net, targets)?;
        let (start, end) = stim.active_window();
        let window = u64::from(end - start) + 1;
        let injections = targets
            .into_iter()
            .map(|ff| {
                let mut rng = stream_rng(seed, STREAM_CAMPAIGN, ff.index() as u64);
                let cycles = (0..injections_per_ff)
                    .map(|_| start + next_below(&mut rng, window) as u32)
                    .collect();
                (ff, cycles)
            })
            .collect();
        Ok(CampaignPlan { injections })
    }

    /// One injection per (target, cycle) pair over the whole active window.
    pub fn exhaustive(
        net: &Netlist,
        stim: &Stimulus,
        targets: Option<&[FfId]>,
    ) -> Result<CampaignPlan, CampaignError> {
        let targets = check_targets(net, targets)?;
        let (start, end) = stim.active_window();
        let injections = targets
            .into_iter()
            .map(|ff| (ff, (start..=end).collect()))
            .collect();
        Ok(CampaignPlan { injections })
    }

    pub fn injections(&self) -> &[(FfId, Vec<u32>)] {
        &self.injections
    }

    pub fn total_runs(&self) -> u64 {
        self.injections.iter().map(|(_, c)| c.len() as u64).sum()
    }
}

fn check_targets(net: &Netlist, targets: Option<&[FfId]>) -> Result<Vec<FfId>, CampaignError> {
    let targets: Vec<FfId> = match targets {
        Some(t) => t.to_vec(),
        None => net.ff_ids().collect(),
    };
    let mut seen = vec![false; net.ff_count()];
    for &ff in &targets {
        if seen[ff.index()] {
            return Err(CampaignError::DuplicateTarget {
                ff: net.ff_name(ff).to_string(),
            });
        }
        seen[ff.index()] = true;
    }
    Ok(targets)
}

/// Failure counts and de-rating ratios for one flip-flop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdrRecord {
    pub ff_name: String,
    pub runs: u32,
    pub output_failures: u32,
    pub application_failures: u32,
    pub fdr_output: f64,
    pub fdr_application: f64,
}

/// Campaign result. Records are sorted by flip-flop declaration order and do
/// not depend on plan order or scheduling; only `wall_clock_s` varies
/// between runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdrTable {
    pub records: Vec<FdrRecord>,
    pub total_runs: u64,
    pub wall_clock_s: f64,
}

impl FdrTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "ff_name,runs,output_failures,application_failures,fdr_output,fdr_application\n",
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.ff_name,
                r.runs,
                r.output_failures,
                r.application_failures,
                r.fdr_output,
                r.fdr_application
            );
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Vec<FdrRecord>, CampaignError> {
        let malformed = |line: usize, reason: &str| CampaignError::MalformedTable {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| malformed(1, "empty table"))?;
        if header
            != "ff_name,runs,output_failures,application_failures,fdr_output,fdr_application"
        {
            return Err(malformed(1, "unexpected header"));
        }
        let mut records = Vec::new();
        for (idx, row) in lines {
            if row.is_empty() {
                continue;
            }
            let fields: Vec<&str> = row.split(',').collect();
            if fields.len() != 6 {
                return Err(malformed(idx + 1, "expected 6 fields"));
            }
            let record = FdrRecord {
                ff_name: fields[0].to_string(),
                runs: fields[1]
                    .parse()
                    .map_err(|_| malformed(idx + 1, "bad run count"))?,
                output_failures: fields[2]
                    .parse()
                    .map_err(|_| malformed(idx + 1, "bad output failure count"))?,
                application_failures: fields[3]
                    .parse()
                    .map_err(|_| malformed(idx + 1, "bad application failure count"))?,
                fdr_output: fields[4]
                    .parse()
                    .map_err(|_| malformed(idx + 1, "bad output de-rating"))?,
                fdr_application: fields[5]
                    .parse()
                    .map_err(|_| malformed(idx + 1, "bad application de-rating"))?,
            };
            records.push(record);
        }
        Ok(records)
    }
}

/// Runs a full campaign: one golden run, then every planned injection on a
/// worker pool, then a deterministic reduction into per-flip-flop counts.
pub fn run_campaign(
    net: &Netlist,
    stim: &Stimulus,
    plan: &CampaignPlan,
    checker: &CheckerConfig,
) -> Result<FdrTable, CampaignError> {
    let started = Instant::now();
    let resolved = checker.resolve(net)?;
    let golden = simulate(net, stim, None)
        .map_err(|source| CampaignError::GoldenRun { source })?
        .trace;

    let jobs: Vec<(usize, FfId, u32)> = plan
        .injections
        .iter()
        .enumerate()
        .flat_map(|(slot, (ff, cycles))| cycles.iter().map(move |&c| (slot, *ff, c)))
        .collect();

    let outcomes: Vec<(usize, Classification)> = jobs
        .par_iter()
        .map(|&(slot, ff, cycle)| {
            let run = simulate(net, stim, Some(Fault { ff, cycle })).map_err(|source| {
                CampaignError::RunFailed {
                    ff: net.ff_name(ff).to_string(),
                    cycle,
                    source,
                }
            })?;
            let class = classify_run(&golden, &run.trace, &resolved, cycle)?;
            Ok((slot, class))
        })
        .collect::<Result<_, CampaignError>>()?;

    let mut output_failures = vec![0u32; plan.injections.len()];
    let mut application_failures = vec![0u32; plan.injections.len()];
    for (slot, class) in outcomes {
        match class {
            Classification::NoFailure => {}
            Classification::OutputOnly => output_failures[slot] += 1,
            Classification::OutputAndApplication => {
                output_failures[slot] += 1;
                application_failures[slot] += 1;
            }
        }
    }

    let mut order: Vec<usize> = (0..plan.injections.len()).collect();
    order.sort_by_key(|&slot| plan.injections[slot].0);
    let records = order
        .into_iter()
        .map(|slot| {
            let (ff, cycles) = &plan.injections[slot];
            let runs = cycles.len() as u32;
            FdrRecord {
                ff_name: net.ff_name(*ff).to_string(),
                runs,
                output_failures: output_failures[slot],
                application_failures: application_failures[slot],
                fdr_output: f64::from(output_failures[slot]) / f64::from(runs),
                fdr_application: f64::from(application_failures[slot]) / f64::from(runs),
            }
        })
        .collect();

    Ok(FdrTable {
        records,
        total_runs: plan.total_runs(),
        wall_clock_s: started.elapsed().as_secs_f64(),
    })
}
