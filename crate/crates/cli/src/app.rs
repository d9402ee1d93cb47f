//! Command-line surface. Exit codes: 0 opaque or holds, 1 not opaque or
//! fails, 2 usage or input error, 3 resource cap.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opacity_core::fixtures::FixtureCatalog;
use opacity_core::observer::{
    build_two_way_observer_with, replay_witness, verify_with, ObserverConfig, ObserverError,
    Verdict, DEFAULT_STATE_CAP,
};
use opacity_core::oracle::{implication_suite, random_system, RandomSpec};
use opacity_core::quotient::{
    build_quotient, check_eq1_condition, check_infsop_self, coarsest_infsop_partition,
    validate_partition, QuotientError,
};
use opacity_core::relations::{
    check_bisimulation, check_infsop_bisimulation, check_initsop_bisimulation,
    check_initsop_simulation, check_simulation,
};
use opacity_core::{augment, Notion, Partition, RelationDiagnosis, TransitionSystem};
use opacity_pwa::verify::DEFAULT_SAMPLES;
use opacity_pwa::{
    build_pwa_quotient, sampling_consistency, verify_region_transitions, RegionLayout,
};
use thiserror::Error;

use crate::dot::{component_dot, observer_dot, system_dot};
use crate::format::{
    parse_nts, parse_partition, parse_relation, serialize_nts, serialize_partition,
    serialize_relation, FormatError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

type PartitionCheck = fn(&Partition) -> Result<RelationDiagnosis, QuotientError>;

const DEMO_SEED: u64 = 2024;
const DEMO_K_MAX: usize = 8;

#[derive(Debug, Parser)]
#[command(
    name = "opacity",
    version,
    about = "Opacity verification for nondeterministic finite transition systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NotionArg {
    Initso,
    Cso,
    Kso,
    Infso,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RelationKind {
    Sim,
    Bisim,
    InitsopSim,
    InitsopBisim,
    InfsopBisim,
}

#[derive(Debug, Args)]
pub struct CapArg {
    /// Maximum number of observer states before giving up.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub state_cap: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide one or more opacity notions.
    Check {
        #[arg(long, value_enum, value_delimiter = ',', required = true)]
        notion: Vec<NotionArg>,
        /// Step bound for `kso`.
        #[arg(long)]
        k: Option<usize>,
        /// Print the full observer path and its replay for violations.
        #[arg(long)]
        witness: bool,
        #[command(flatten)]
        cap: CapArg,
        file: PathBuf,
    },
    /// Build the two-way observer.
    Observer {
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long, conflicts_with = "backward_only")]
        forward_only: bool,
        #[arg(long)]
        backward_only: bool,
        /// Highlight states violating this notion.
        #[arg(long, value_enum)]
        notion: Option<NotionArg>,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        cap: CapArg,
        file: PathBuf,
    },
    /// Build the quotient induced by a partition.
    Quotient {
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        check_initsop: bool,
        #[arg(long)]
        check_infsop: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        file: PathBuf,
    },
    /// Check a state relation between two systems.
    Relation {
        #[arg(long, value_enum)]
        kind: RelationKind,
        left: PathBuf,
        right: PathBuf,
        relation: PathBuf,
    },
    /// Coarsest partition whose equivalence preserves every notion.
    Refine {
        #[arg(long)]
        out: Option<PathBuf>,
        file: PathBuf,
    },
    /// Complete the system with a non-secret sink.
    Augment {
        #[arg(long)]
        out: Option<PathBuf>,
        file: PathBuf,
    },
    /// Generate a seeded random system.
    Random {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        inputs: usize,
        #[arg(long)]
        outputs: usize,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        secret_frac: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Reference fixtures.
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum Demo {
    /// Region abstraction of the planar piecewise-linear system.
    Pwa {
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FixturesAction {
    List,
    /// Print a fixture; relations and partitions use `relation:ID` and `partition:ID`.
    Dump {
        id: String,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Observer(#[from] ObserverError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Pwa(#[from] opacity_pwa::PwaError),
    #[error(transparent)]
    System(#[from] opacity_core::system::SystemError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Observer(ObserverError::ResourceCap { .. }) => EXIT_CAP,
            _ => EXIT_USAGE,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_system(path: &Path) -> Result<Arc<TransitionSystem>, CliError> {
    parse_nts(&read(path)?)
        .map(Arc::new)
        .map_err(|source| CliError::Format {
            path: path.to_owned(),
            source,
        })
}

fn emit(out: &mut dyn Write, dest: Option<&Path>, text: &str) -> Result<(), CliError> {
    match dest {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        }),
        None => {
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn to_notion(n: NotionArg, k: Option<usize>) -> Result<Notion, CliError> {
    Ok(match n {
        NotionArg::Initso => Notion::InitSO,
        NotionArg::Cso => Notion::CSO,
        NotionArg::Infso => Notion::InfSO,
        NotionArg::Kso => match k {
            Some(k) if k >= 1 => Notion::KSO(k),
            Some(_) => return Err(CliError::Usage("--k must be at least 1".into())),
            None => return Err(CliError::Usage("--notion kso requires --k".into())),
        },
    })
}

fn report_verdict(out: &mut dyn Write, v: &Verdict, full: bool) {
    let sys = &v.system;
    if v.opaque {
        let _ = writeln!(out, "{}: opaque", v.notion);
        return;
    }
    let _ = writeln!(out, "{}: not opaque", v.notion);
    if let Some(w) = &v.witness {
        if full {
            let _ = writeln!(
                out,
                "  witness path: {}",
                w.describe(sys).replace('\n', "\n  ")
            );
            match replay_witness(v) {
                Ok(()) => {
                    let _ = writeln!(out, "  replay: ok");
                }
                Err(e) => {
                    let _ = writeln!(out, "  replay: FAILED ({e})");
                }
            }
        } else {
            let _ = writeln!(
                out,
                "  witness: {} after {} steps",
                w.terminal().describe(sys),
                w.steps.len()
            );
        }
    }
}

/// Runs a parsed command, writing results to `out` and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Check {
            notion,
            k,
            witness,
            cap,
            file,
        } => {
            let notions = notion
                .into_iter()
                .map(|n| to_notion(n, k))
                .collect::<Result<Vec<_>, _>>()?;
            let sys = load_system(&file)?;
            let config = ObserverConfig {
                state_cap: cap.state_cap,
            };
            let results: Vec<Result<Verdict, ObserverError>> = std::thread::scope(|s| {
                let handles: Vec<_> = notions
                    .iter()
                    .map(|&n| {
                        let sys = &sys;
                        s.spawn(move || verify_with(sys, n, &config))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("verifier thread"))
                    .collect()
            });
            let mut all = true;
            for r in results {
                let v = r?;
                all &= v.opaque;
                report_verdict(out, &v, witness);
            }
            Ok(if all { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Observer {
            dot,
            forward_only,
            backward_only,
            notion,
            k,
            cap,
            file,
        } => {
            let notion = notion.map(|n| to_notion(n, k)).transpose()?;
            let sys = load_system(&file)?;
            let config = ObserverConfig {
                state_cap: cap.state_cap,
            };
            let obs = build_two_way_observer_with(&sys, &config)?;
            let aug = obs.source().clone();
            let bound = opacity_core::observer::component_bound(&aug);
            let (text, graph) = if forward_only || backward_only {
                let (label, comp) = if forward_only {
                    ("forward", obs.forward())
                } else {
                    ("backward", obs.backward())
                };
                let mut text =
                    format!("{label} component: {} states (bound {bound})\n", comp.len());
                for node in &comp.nodes {
                    text.push_str(&format!("  {{{}}}\n", aug.names(node).join(",")));
                }
                (
                    text,
                    component_dot(&aug, comp, &format!("{}-{label}", aug.name())),
                )
            } else {
                let mut text = format!(
                    "observer: {} states, {} transitions (forward {}, backward {}, bound {bound} each)\n",
                    obs.states().len(),
                    obs.transitions().len(),
                    obs.forward().len(),
                    obs.backward().len()
                );
                let offenders = notion.map(|n| obs.offenders(n)).unwrap_or_default();
                for (i, st) in obs.states().iter().enumerate() {
                    let mark = if offenders.contains(&i) { "  !" } else { "" };
                    text.push_str(&format!("  o{i}: {}{mark}\n", st.describe(&aug)));
                }
                (text, observer_dot(&obs, notion))
            };
            let _ = out.write_all(text.as_bytes());
            if let Some(p) = dot {
                emit(out, Some(&p), &graph)?;
            }
            Ok(EXIT_OK)
        }
        Command::Quotient {
            partition,
            check_initsop,
            check_infsop,
            out: dest,
            file,
        } => {
            let sys = load_system(&file)?;
            let p =
                parse_partition(&read(&partition)?, sys).map_err(|source| CliError::Format {
                    path: partition.clone(),
                    source,
                })?;
            let violations = validate_partition(&p);
            if !violations.is_empty() {
                return Err(QuotientError::Invalid(violations).into());
            }
            let q = build_quotient(&p)?;
            emit(out, dest.as_deref(), &serialize_nts(&q))?;
            let mut ok = true;
            let checks: [(bool, &str, PartitionCheck); 2] = [
                (check_initsop, "InitSOP", check_eq1_condition),
                (check_infsop, "InfSOP", check_infsop_self),
            ];
            for (enabled, label, check) in checks {
                if !enabled {
                    continue;
                }
                match check(&p) {
                    Ok(d) => {
                        ok &= d.holds();
                        let _ = write!(out, "{label} condition: {d}");
                        if d.holds() {
                            let _ = writeln!(out);
                        }
                    }
                    Err(e @ QuotientError::NotSecretCompatible(_)) => {
                        ok = false;
                        let _ = writeln!(out, "{label} condition: fails\n  {e}");
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(if ok { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Relation {
            kind,
            left,
            right,
            relation,
        } => {
            let (l, r) = (load_system(&left)?, load_system(&right)?);
            let rel =
                parse_relation(&read(&relation)?, l, r).map_err(|source| CliError::Format {
                    path: relation.clone(),
                    source,
                })?;
            let d = match kind {
                RelationKind::Sim => check_simulation(&rel),
                RelationKind::Bisim => check_bisimulation(&rel),
                RelationKind::InitsopSim => check_initsop_simulation(&rel),
                RelationKind::InitsopBisim => check_initsop_bisimulation(&rel),
                RelationKind::InfsopBisim => check_infsop_bisimulation(&rel),
            };
            let _ = write!(out, "{d}");
            if d.holds() {
                let _ = writeln!(out);
            }
            Ok(if d.holds() { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Refine { out: dest, file } => {
            let sys = load_system(&file)?;
            let p = coarsest_infsop_partition(sys);
            emit(out, dest.as_deref(), &serialize_partition(&p))?;
            Ok(EXIT_OK)
        }
        Command::Augment { out: dest, file } => {
            let sys = load_system(&file)?;
            emit(out, dest.as_deref(), &serialize_nts(&augment(&sys)?))?;
            Ok(EXIT_OK)
        }
        Command::Random {
            states,
            inputs,
            outputs,
            density,
            secret_frac,
            seed,
        } => {
            if states == 0 || inputs == 0 || outputs == 0 {
                return Err(CliError::Usage(
                    "--states, --inputs and --outputs must be positive".into(),
                ));
            }
            if !(density > 0.0 && density <= 1.0) || !(0.0..=1.0).contains(&secret_frac) {
                return Err(CliError::Usage(
                    "--density must be in (0,1] and --secret-frac in [0,1]".into(),
                ));
            }
            let sys = random_system(
                seed,
                RandomSpec {
                    states,
                    inputs,
                    outputs,
                    density,
                    secret_fraction: secret_frac,
                },
            );
            emit(out, None, &serialize_nts(&sys))?;
            Ok(EXIT_OK)
        }
        Command::Demo {
            which: Demo::Pwa { dot },
        } => demo_pwa(out, dot.as_deref()),
        Command::Fixtures { action } => {
            let cat = FixtureCatalog::new();
            match action {
                FixturesAction::List => {
                    for id in cat.ids() {
                        let _ = writeln!(out, "{id}");
                    }
                    for id in cat.relation_ids() {
                        let f = cat.relation_fixture(id).expect("listed relation");
                        let _ = writeln!(out, "relation:{id} ({} -> {})", f.left, f.right);
                    }
                    for id in cat.partition_ids() {
                        let f = cat.partition_fixture(id).expect("listed partition");
                        let _ = writeln!(out, "partition:{id} (on {})", f.system);
                    }
                }
                FixturesAction::Dump { id } => {
                    // relation and partition ids may share a system id, so they take a prefix
                    let text = if let Some(rid) = id.strip_prefix("relation:") {
                        cat.relation(rid).map(|r| serialize_relation(&r))
                    } else if let Some(pid) = id.strip_prefix("partition:") {
                        cat.partition(pid).map(|p| serialize_partition(&p))
                    } else {
                        cat.system(id.strip_prefix("system:").unwrap_or(&id))
                            .map(|s| serialize_nts(&s))
                    };
                    let text =
                        text.ok_or_else(|| CliError::Usage(format!("unknown fixture `{id}`")))?;
                    emit(out, None, &text)?;
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn demo_pwa(out: &mut dyn Write, dot: Option<&Path>) -> Result<i32, CliError> {
    let layout = RegionLayout::standard();
    let diag = verify_region_transitions(&layout)?;
    let _ = writeln!(out, "# region transitions: {diag}");
    let sampling = sampling_consistency(&layout, DEMO_SEED, DEFAULT_SAMPLES);
    let _ = writeln!(
        out,
        "# sampling: {} points, {} exceptions",
        sampling.samples,
        sampling.exceptions.len()
    );
    let sys = build_pwa_quotient(&layout)?;
    let _ = out.write_all(serialize_nts(&sys).as_bytes());
    let report = implication_suite(&sys, DEMO_K_MAX)?;
    let mut all = report.consistent() && sampling.exceptions.is_empty();
    for v in report.verdicts.values() {
        all &= v.opaque;
        let _ = writeln!(
            out,
            "# {}: {}",
            v.notion,
            if v.opaque { "opaque" } else { "not opaque" }
        );
    }
    if let Some(p) = dot {
        emit(out, Some(p), &system_dot(&sys))?;
    }
    Ok(if all { EXIT_OK } else { EXIT_FAIL })
}
