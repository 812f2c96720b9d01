//! The `sumsets` command line.

pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::constructions::{self, ColoringOptions, Coloring, VerifyOptions};
use crate::correspondence;
use crate::density::{self, Schedule};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::search::{self, Mode, ResidueFilter, SearchConfig, SearchReport};
use crate::setexpr::{self, Limits, SetExpr};

use report::{Budgets, Format, RunManifest, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INCOMPLETE: i32 = 2;
pub const EXIT_CLAIM_FAILED: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "sumsets",
    version,
    about = "Finite-scale experiments on shifted sumsets B+B+t inside sets of naturals",
    after_help = "Exit codes: 0 success, 1 usage or parse error, 2 search budget exhausted, 3 claim check failed.\n\
                  Environment: SUMSETS_MAX_HORIZON caps materialized horizons (default 268435456)."
)]
pub struct Cli {
    /// Disable the wall-clock budget and omit timings so reports are
    /// byte-identical across runs.
    #[arg(long, global = true)]
    pub deterministic: bool,

    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Branch-and-bound node budget per search.
    #[arg(long, global = true, env = "SUMSETS_NODE_BUDGET", default_value_t = search::DEFAULT_NODE_BUDGET)]
    pub node_budget: u64,

    /// Wall-clock budget per search, in seconds.
    #[arg(long, global = true, env = "SUMSETS_TIME_BUDGET", default_value_t = 60)]
    pub time_budget: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Set expression in the DSL, e.g. `cong(3,0)`.
    #[arg(long)]
    pub set: Option<String>,
    /// Built-in construction key, e.g. `P41_A`.
    #[arg(long)]
    pub builtin: Option<String>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Prefix-density profile along a window schedule.
    Density {
        #[command(flatten)]
        source: Source,
        /// Overlap for the syndetic built-ins, as a rational.
        #[arg(long)]
        eps: Option<String>,
        /// `linear(K)`, `powers4(K)`, `prop41(K)` or `[N1,N2,...]`.
        #[arg(long)]
        schedule: String,
    },
    /// Largest witness B with B+B+t inside the set up to N.
    Search {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        eps: Option<String>,
        /// Shift in B+B+t.
        #[arg(long, default_value_t = 0)]
        t: u64,
        /// Horizon; accepts `a^b`.
        #[arg(long = "N", value_parser = parse_natural)]
        n: u64,
        /// `exact` (branch and bound) or `greedy`.
        #[arg(long, default_value = "exact")]
        mode: String,
        /// Restrict B to one residue class, as `m,r`.
        #[arg(long)]
        residue: Option<String>,
        /// Target size; exit code 3 when it is not reached.
        #[arg(long)]
        min_size: Option<usize>,
        /// Require this element in B.
        #[arg(long)]
        anchor: Option<u64>,
        /// Only require sums of distinct elements.
        #[arg(long)]
        drop_diagonal: bool,
        /// Largest candidate count accepted by exact mode.
        #[arg(long, default_value_t = search::DEFAULT_EXACT_VERTEX_CAP)]
        vertex_cap: usize,
    },
    /// Run every claim attached to a built-in.
    Verify {
        #[arg(long)]
        builtin: String,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long = "N", value_parser = parse_natural)]
        n: u64,
        /// Sampled (b', t) pairs for the obstruction scans.
        #[arg(long, default_value_t = 4)]
        samples: usize,
        /// Horizon for witness searches (default: min(N, 4096)).
        #[arg(long = "witness-N", value_parser = parse_natural)]
        witness_n: Option<u64>,
    },
    /// Partition, gaps, densities and witnesses of a coloring.
    Coloring {
        /// One DSL expression per color class.
        #[arg(long, num_args = 1.., required_unless_present = "builtin", conflicts_with = "builtin")]
        classes: Vec<String>,
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long = "N", value_parser = parse_natural)]
        n: u64,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long = "witness-N", value_parser = parse_natural, default_value = "1024")]
        witness_n: u64,
        /// Shifts for the per-class witness searches.
        #[arg(long, default_value = "0,1")]
        t: String,
    },
    /// Empirical frequencies and the correspondence inequalities.
    Correspondence {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        eps: Option<String>,
        /// Window index on the prop41 schedule.
        #[arg(long, required_unless_present = "n", conflicts_with = "n")]
        k: Option<u64>,
        #[arg(long = "N", value_parser = parse_natural)]
        n: Option<u64>,
    },
    /// Witness size against density over a family with parameter `M`.
    Probe {
        /// DSL template; every `M` is replaced by the parameter.
        #[arg(long)]
        family: String,
        /// `lo..hi` (inclusive) or a comma list.
        #[arg(long = "M")]
        m: String,
        /// Comma list of shifts.
        #[arg(long, default_value = "0")]
        t: String,
        #[arg(long = "N", value_parser = parse_natural)]
        n: u64,
        #[arg(long)]
        min_size: Option<usize>,
        #[arg(long, default_value = "exact")]
        mode: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Density { .. } => "density",
            Command::Search { .. } => "search",
            Command::Verify { .. } => "verify",
            Command::Coloring { .. } => "coloring",
            Command::Correspondence { .. } => "correspondence",
            Command::Probe { .. } => "probe",
        }
    }
}

/// A decimal integer or `a^b`.
pub fn parse_natural(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    let bad = || format!("expected a natural number or a^b, got `{s}`");
    match s.split_once('^') {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().parse().map_err(|_| bad())?;
            a.checked_pow(b).ok_or_else(bad)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

fn parse_list(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    let bad = || Error::invalid(format!("expected `lo..hi` or a comma list, got `{s}`"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn parse_eps(eps: &Option<String>) -> Result<Option<Rational>> {
    eps.as_deref()
        .map(|e| rational::parse(e).ok_or_else(|| Error::invalid(format!("`{e}` is not a rational"))))
        .transpose()
}

struct Resolved {
    expr: SetExpr,
    analytic: Option<density::Analytic>,
}

fn resolve(source: &Source, eps: &Option<String>) -> Result<Resolved> {
    match (&source.set, &source.builtin) {
        (Some(text), _) => Ok(Resolved {
            expr: setexpr::parse(text)?,
            analytic: None,
        }),
        (None, Some(key)) => {
            let nc = constructions::get_with(key, parse_eps(eps)?)?;
            Ok(Resolved {
                expr: nc.set()?.clone(),
                analytic: nc.analytic.primary(),
            })
        }
        (None, None) => Err(Error::invalid("one of --set or --builtin is required")),
    }
}

struct Run {
    manifest: RunManifest,
    limits: Limits,
    time_budget: Option<Duration>,
}

fn fmt_q(r: &Rational) -> String {
    rational::fmt(r)
}

fn write_report<T: Serialize>(cli: &Cli, run: &Run, report: &T, table: impl FnOnce() -> Table) -> Result<()> {
    let bytes = match cli.format {
        Format::Json => report::render_json(&run.manifest, report)?,
        Format::Csv => report::render_csv(&run.manifest, &table())?,
    };
    report::emit(&bytes, cli.out.as_deref())
}

fn execute(cli: &Cli) -> Result<i32> {
    let limits = Limits::from_env();
    let time_budget = (!cli.deterministic).then(|| Duration::from_secs(cli.time_budget.max(1)));
    let input = match &cli.command {
        Command::Density { source, .. }
        | Command::Search { source, .. }
        | Command::Correspondence { source, .. } => {
            vec![source.set.clone().or(source.builtin.clone()).unwrap_or_default()]
        }
        Command::Verify { builtin, .. } => vec![builtin.clone()],
        Command::Coloring { classes, builtin, .. } => match builtin {
            Some(b) => vec![b.clone()],
            None => classes.clone(),
        },
        Command::Probe { family, .. } => vec![family.clone()],
    };
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        config: serde_json::to_value(cli).map_err(|e| Error::invalid(e.to_string()))?,
        version: report::VERSION,
        input,
        seed: cli.seed,
        timestamp: report::timestamp(cli.deterministic),
        budgets: Budgets {
            node_budget: cli.node_budget,
            time_budget_s: time_budget.map(|d| d.as_secs()),
            max_horizon: limits.max_horizon,
        },
    };
    let run = Run {
        manifest,
        limits,
        time_budget,
    };
    match &cli.command {
        Command::Density { source, eps, schedule } => {
            let r = resolve(source, eps)?;
            let sched = Schedule::parse(schedule)?;
            let rep = density::density_report(&r.expr, &sched, r.analytic, &run.limits)?;
            write_report(cli, &run, &rep, || {
                let mut t = Table::new(&["window", "count", "ratio"]);
                for ((w, c), q) in rep.windows.iter().zip(&rep.counts).zip(&rep.ratios) {
                    t.push(vec![w.to_string(), c.to_string(), fmt_q(q)]);
                }
                t
            })?;
            Ok(EXIT_OK)
        }
        Command::Search {
            source,
            eps,
            t,
            n,
            mode,
            residue,
            min_size,
            anchor,
            drop_diagonal,
            vertex_cap,
        } => {
            let r = resolve(source, eps)?;
            let mut cfg = SearchConfig::new(mode.parse()?, *t, *n);
            cfg.node_budget = cli.node_budget;
            cfg.time_budget = run.time_budget;
            cfg.min_size_target = *min_size;
            cfg.anchor = *anchor;
            cfg.drop_diagonal = *drop_diagonal;
            cfg.exact_vertex_cap = *vertex_cap;
            if let Some(res) = residue {
                let v = parse_list(res)?;
                let [modulus, residue] = v[..] else {
                    return Err(Error::invalid("--residue expects `m,r`"));
                };
                cfg.residue_filter = Some(ResidueFilter { modulus, residue });
            }
            let outcome = search::max_witness(&r.expr, &cfg, &run.limits)?;
            let rep = SearchReport::new(&r.expr, &cfg, outcome);
            write_report(cli, &run, &rep, || {
                let mut t = Table::new(&["b"]);
                for b in &rep.witness.b {
                    t.push(vec![b.to_string()]);
                }
                t
            })?;
            Ok(if !rep.stats.complete && !rep.reached_target {
                EXIT_INCOMPLETE
            } else if !rep.reached_target {
                EXIT_CLAIM_FAILED
            } else {
                EXIT_OK
            })
        }
        Command::Verify {
            builtin,
            eps,
            n,
            samples,
            witness_n,
        } => {
            let mut opts = VerifyOptions::new(*n);
            opts.seed = cli.seed;
            opts.samples = *samples;
            opts.node_budget = cli.node_budget;
            opts.time_budget = run.time_budget;
            opts.eps = parse_eps(eps)?;
            if let Some(w) = witness_n {
                opts.witness_horizon = *w;
            }
            let rep = constructions::verify(builtin, &opts, &run.limits)?;
            write_report(cli, &run, &rep, || {
                let mut t = Table::new(&["claim", "pass", "incomplete"]);
                for r in &rep.results {
                    let name = serde_json::to_value(&r.claim)
                        .ok()
                        .and_then(|v| v.get("claim").and_then(|c| c.as_str().map(String::from)))
                        .unwrap_or_default();
                    t.push(vec![name, r.pass.to_string(), r.incomplete.to_string()]);
                }
                t
            })?;
            let failed = rep.results.iter().filter(|r| !r.pass);
            let (mut any, mut budget) = (false, false);
            for r in failed {
                any = true;
                budget |= r.incomplete;
            }
            Ok(match (any, budget) {
                (false, _) => EXIT_OK,
                (true, true) => EXIT_INCOMPLETE,
                (true, false) => EXIT_CLAIM_FAILED,
            })
        }
        Command::Coloring {
            classes,
            builtin,
            n,
            schedule,
            witness_n,
            t,
        } => {
            let coloring = match builtin {
                Some(key) => constructions::get(key)?.coloring()?.clone(),
                None => Coloring::new(
                    classes
                        .iter()
                        .map(|c| setexpr::parse(c))
                        .collect::<Result<Vec<_>>>()?,
                )?,
            };
            let opts = ColoringOptions {
                schedule: schedule.as_deref().map(Schedule::parse).transpose()?,
                witness_horizon: *witness_n,
                t_values: parse_list(t)?,
                node_budget: cli.node_budget,
                time_budget: run.time_budget,
            };
            let rep = constructions::check_coloring(&coloring, *n, &opts, &run.limits)?;
            write_report(cli, &run, &rep, || {
                let mut t = Table::new(&["class", "count", "gap", "upper_est", "lower_est", "audit_sum"]);
                for c in &rep.classes {
                    t.push(vec![
                        c.index.to_string(),
                        c.count.to_string(),
                        c.gap.gap.map(|g| g.to_string()).unwrap_or_default(),
                        fmt_q(&c.upper_est),
                        fmt_q(&c.lower_est),
                        fmt_q(&c.audit_sum),
                    ]);
                }
                t
            })?;
            let incomplete = rep.classes.iter().flat_map(|c| &c.witnesses).any(|w| !w.complete);
            let audit_failed = rep.audit.as_ref().is_some_and(|a| a.within_slack.iter().any(|ok| !ok));
            Ok(if audit_failed {
                EXIT_CLAIM_FAILED
            } else if incomplete {
                EXIT_INCOMPLETE
            } else {
                EXIT_OK
            })
        }
        Command::Correspondence { source, eps, k, n } => {
            let r = resolve(source, eps)?;
            let n_k = match (k, n) {
                (Some(k), _) => density::prop41_window(*k),
                (None, Some(n)) => *n,
                (None, None) => return Err(Error::invalid("one of --k or --N is required")),
            };
            let mut rep = correspondence::check_fcp_inequalities(&r.expr, n_k, &run.limits)?;
            rep.frequencies.k = *k;
            write_report(cli, &run, &rep, || {
                let mut t = Table::new(&["name", "lhs", "rhs", "slack", "margin", "pass"]);
                for i in &rep.inequalities {
                    t.push(vec![
                        i.name.to_string(),
                        fmt_q(&i.lhs),
                        fmt_q(&i.rhs),
                        fmt_q(&i.slack),
                        fmt_q(&i.margin),
                        i.pass.to_string(),
                    ]);
                }
                t
            })?;
            Ok(if rep.pass { EXIT_OK } else { EXIT_CLAIM_FAILED })
        }
        Command::Probe {
            family,
            m,
            t,
            n,
            min_size,
            mode,
        } => {
            let members = parse_list(m)?
                .into_iter()
                .map(|v| {
                    let text = family.replace('M', &v.to_string());
                    Ok((format!("M={v}"), setexpr::parse(&text)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut base = SearchConfig::new(mode.parse::<Mode>()?, 0, *n);
            base.node_budget = cli.node_budget;
            base.time_budget = run.time_budget;
            let rows = search::probe_threshold(&members, &parse_list(t)?, &base, *min_size, &run.limits)?;
            write_report(cli, &run, &rows, || {
                let mut tab = Table::new(&["label", "density", "t", "mode", "size", "complete", "reached_target"]);
                for r in &rows {
                    for c in &r.cells {
                        tab.push(vec![
                            r.label.clone(),
                            fmt_q(&r.density_at_horizon),
                            c.t.to_string(),
                            format!("{:?}", c.mode).to_lowercase(),
                            c.size.to_string(),
                            c.complete.to_string(),
                            c.reached_target.to_string(),
                        ]);
                    }
                }
                tab
            })?;
            let cells = rows.iter().flat_map(|r| &r.cells);
            let incomplete = cells.clone().any(|c| !c.complete && !c.reached_target);
            let missed = cells.into_iter().any(|c| !c.reached_target);
            Ok(if incomplete {
                EXIT_INCOMPLETE
            } else if missed {
                EXIT_CLAIM_FAILED
            } else {
                EXIT_OK
            })
        }
    }
}

/// Parses `args` (including the program name) and runs the command;
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
