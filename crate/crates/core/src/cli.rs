//! Command-line driver.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::causal::{compare_criteria, history_check};
use crate::classification::{check_a4, check_instantiation, check_pdh, check_strict_participation, classify_all};
use crate::compositional::{saturate_with, Criterion};
use crate::format::{parse, serialize, Parsed};
use crate::model::Options;
use crate::pqe::expand_qualities;
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(name = "procid", version, about = "Process identity reasoner and knowledge-base validator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Compositional,
    A5,
    C1,
    C2,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Compositional => Criterion::Compositional,
            CriterionArg::A5 => Criterion::A5,
            CriterionArg::C1 => Criterion::C1,
            CriterionArg::C2 => Criterion::C2,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Knowledge base file.
    pub file: PathBuf,
    #[arg(long)]
    pub extended_simple: bool,
    #[arg(long)]
    pub parthood_realization: bool,
    #[arg(long)]
    pub strict_participation: bool,
    #[arg(long)]
    pub exclusive_determinates: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            extended_simple: self.extended_simple,
            parthood_realization: self.parthood_realization,
            strict_participation: self.strict_participation,
            exclusive_determinates: self.exclusive_determinates,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate, saturate, and check PDH and A4.
    Check(Common),
    /// Derived process categories.
    Classify(Common),
    /// Equality classes under one identity criterion.
    Identity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
    },
    /// Verdicts of all criteria for every pair of processes.
    Compare(Common),
    /// Check a history against the spatiotemporal region of its bearer.
    History {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        history: String,
        #[arg(long)]
        bearer: String,
    },
    /// Apply quality expansion and print the resulting KB.
    Expand(Common),
    /// Print the KB in canonical form.
    Fmt(Common),
}

/// What a run produced: text for stdout and an exit status.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub status: i32,
}

fn load(common: &Common) -> Result<Parsed, Outcome> {
    let text = std::fs::read_to_string(&common.file).map_err(|e| Outcome {
        stdout: String::new(),
        stderr: format!("error: cannot read {}: {e}\n", common.file.display()),
        status: 2,
    })?;
    Ok(parse(&text, &common.file.display().to_string(), common.options()))
}

fn render(common: &Common, parsed: &Parsed, report: Report) -> Outcome {
    let stdout = match common.format {
        OutputFormat::Text => report.to_text(&parsed.kb),
        OutputFormat::Json => report.to_json(&parsed.kb) + "\n",
    };
    Outcome { stdout, stderr: String::new(), status: report.exit_status() }
}

pub fn run(cli: Cli) -> Outcome {
    let common = match &cli.command {
        Command::Check(c) | Command::Classify(c) | Command::Compare(c) | Command::Expand(c) | Command::Fmt(c) => c,
        Command::Identity { common, .. } | Command::History { common, .. } => common,
    };
    let parsed = match load(common) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let kb = &parsed.kb;
    let mut diags = parsed.diagnostics.clone();
    if parsed.has_parse_errors() {
        return render(common, &parsed, Report::new(diags, vec![], vec![]));
    }
    let report = match &cli.command {
        Command::Check(_) => {
            let sat = saturate_with(kb, Criterion::Compositional);
            diags.extend(check_pdh(kb));
            diags.extend(check_a4(kb));
            diags.extend(check_instantiation(kb));
            diags.extend(check_strict_participation(kb));
            diags.extend(sat.diagnostics);
            Report::new(diags, sat.state.nontrivial_partition(kb), vec![])
        }
        Command::Classify(_) => {
            diags.extend(classify_all(kb));
            Report::new(diags, vec![], vec![])
        }
        Command::Identity { criterion, .. } => {
            let sat = saturate_with(kb, (*criterion).into());
            diags.extend(sat.diagnostics);
            Report::new(diags, sat.state.nontrivial_partition(kb), vec![])
        }
        Command::Compare(_) => Report::new(diags, vec![], compare_criteria(kb)),
        Command::History { history, bearer, .. } => match history_check(kb, history, bearer) {
            Ok(d) => {
                diags.extend(d);
                Report::new(diags, vec![], vec![])
            }
            Err(e) => return Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), status: 2 },
        },
        Command::Expand(_) => {
            let (expanded, _) = expand_qualities(kb);
            let status = Report::new(diags, vec![], vec![]).exit_status();
            return Outcome { stdout: serialize(&expanded), stderr: String::new(), status };
        }
        Command::Fmt(_) => {
            let status = Report::new(diags, vec![], vec![]).exit_status();
            return Outcome { stdout: serialize(kb), stderr: String::new(), status };
        }
    };
    render(common, &parsed, report)
}
