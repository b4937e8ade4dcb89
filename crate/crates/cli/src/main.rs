use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod render;

/// Exit codes: 0 on success, 2 for usage or input errors, 3 when
/// verification finds a bound violation.
#[derive(Parser)]
#[command(
    name = "selbias",
    version,
    about = "Sensitivity analysis for selection bias in risk-ratio estimates",
    long_about = "Sensitivity analysis for selection bias in risk-ratio estimates.\n\n\
                  When a study is restricted to a selected subset, the observed risk\n\
                  ratio can differ from the one free of that restriction. Given maximal\n\
                  risk-ratio associations between an unmeasured factor and selection and\n\
                  between that factor and the outcome, this tool bounds the distortion,\n\
                  divides the bound out of estimates, reports the parameter strength\n\
                  needed to explain an estimate away, and stress-tests the bounds\n\
                  against exactly computed joint distributions."
)]
pub struct Cli {
    /// JSON file of default option values; explicit flags override it
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output format: text, json, csv, or md
    #[arg(long, global = true, value_name = "FORMAT")]
    pub output: Option<String>,

    /// Decimal places in text, csv, and md output [default: 2]
    #[arg(long, global = true, value_name = "N")]
    pub precision: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Bound the factor by which selection could have distorted a risk ratio
    Bound(AnalysisArgs),
    /// Report the parameter strength needed to move an estimate to a target
    Svalue(SvalueArgs),
    /// Divide an estimate and its confidence limits by a bounding factor
    Adjust(AdjustArgs),
    /// Tabulate bounds over a grid of sensitivity-parameter values
    #[command(long_about = "Tabulate bounds over a grid of sensitivity-parameter values.\n\n\
                            Any parameter may be a range written min:max:steps; each ranged\n\
                            parameter adds a grid axis, and earlier parameters vary slowest.")]
    Table(AnalysisArgs),
    /// Stress-test the bounds against exactly computed joint distributions
    #[command(long_about = "Stress-test the bounds against exactly computed joint distributions.\n\n\
                            Each trial draws a full joint distribution of the unmeasured factor,\n\
                            exposure, selection, and outcome, computes the realized bias and the\n\
                            realized sensitivity parameters exactly, and checks the bias against\n\
                            the bound. With --search, a hill climb drives distributions toward\n\
                            the bound instead of sampling at random. Results are reproducible\n\
                            from the seed regardless of thread count (see RAYON_NUM_THREADS).")]
    Verify(VerifyArgs),
}

/// The sensitivity parameters. Each is a ratio of at least 1; which ones a
/// command needs depends on the scenario.
#[derive(Args, Clone, Default)]
pub struct ParamArgs {
    /// Largest risk ratio between the unmeasured factor and the outcome among the exposed
    #[arg(long, value_name = "VALUE")]
    pub rr_uy_a1: Option<String>,

    /// Largest factor by which selection shifts the unmeasured factor's distribution among the exposed
    #[arg(long, value_name = "VALUE")]
    pub rr_su_a1: Option<String>,

    /// Largest risk ratio between the unmeasured factor and the outcome among the unexposed
    #[arg(long, value_name = "VALUE")]
    pub rr_uy_a0: Option<String>,

    /// Largest factor by which selection shifts the unmeasured factor's distribution among the unexposed
    #[arg(long, value_name = "VALUE")]
    pub rr_su_a0: Option<String>,

    /// Largest risk ratio between the unmeasured factor and the outcome (directional scenarios)
    #[arg(long, value_name = "VALUE")]
    pub rr_uy: Option<String>,

    /// Largest factor by which selection shifts the unmeasured factor's distribution (directional scenarios)
    #[arg(long, value_name = "VALUE")]
    pub rr_su: Option<String>,

    /// Largest risk ratio between the unmeasured factor and the outcome within the selected population
    #[arg(long, value_name = "VALUE")]
    pub rr_uy_s1: Option<String>,

    /// Largest exposure-group ratio of the unmeasured factor's prevalence within the selected population
    #[arg(long, value_name = "VALUE")]
    pub rr_au_s1: Option<String>,

    /// Selection-factor association used as a stand-in for --rr-au-s1; the bound becomes approximate
    #[arg(long, value_name = "VALUE")]
    pub approx_su: Option<String>,

    /// Exposure-factor association used as a stand-in for --rr-au-s1; the bound becomes approximate
    #[arg(long, value_name = "VALUE")]
    pub approx_sa: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct AnalysisArgs {
    /// Assumption set: general, s-equals-u, directional-increased,
    /// directional-decreased, s-equals-u-directional, or selected
    #[arg(long, value_name = "NAME")]
    pub scenario: Option<String>,

    /// Direction in which selection shifts outcome risk in both exposure
    /// groups: increased or decreased
    #[arg(long, value_name = "DIR")]
    pub direction: Option<String>,

    #[command(flatten)]
    pub params: ParamArgs,

    /// Observed point estimate to adjust
    #[arg(long, value_name = "VALUE")]
    pub est: Option<f64>,

    /// Lower confidence limit of the estimate
    #[arg(long, value_name = "VALUE")]
    pub lo: Option<f64>,

    /// Upper confidence limit of the estimate, or inf
    #[arg(long, value_name = "VALUE")]
    pub hi: Option<String>,

    /// Scale the estimate was reported on: rr, or, hr; or and hr are treated
    /// as risk-ratio approximations
    #[arg(long, value_name = "SCALE")]
    pub scale: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct SvalueArgs {
    /// Assumption set: general, s-equals-u, directional-increased,
    /// directional-decreased, s-equals-u-directional, or selected
    #[arg(long, value_name = "NAME")]
    pub scenario: Option<String>,

    /// Direction in which selection shifts outcome risk in both exposure
    /// groups: increased or decreased
    #[arg(long, value_name = "DIR")]
    pub direction: Option<String>,

    /// Observed point estimate
    #[arg(long, value_name = "VALUE")]
    pub est: Option<f64>,

    /// Lower confidence limit of the estimate
    #[arg(long, value_name = "VALUE")]
    pub lo: Option<f64>,

    /// Upper confidence limit of the estimate, or inf
    #[arg(long, value_name = "VALUE")]
    pub hi: Option<String>,

    /// Scale the estimate was reported on: rr, or, hr
    #[arg(long, value_name = "SCALE")]
    pub scale: Option<String>,

    /// Proposed true value to move the estimate to [default: the null, 1]
    #[arg(long = "true", value_name = "VALUE")]
    pub true_value: Option<f64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct AdjustArgs {
    /// Already computed bounding factor; alternative to a scenario with parameters
    #[arg(long, value_name = "VALUE")]
    pub bound: Option<f64>,

    /// Assumption set: general, s-equals-u, directional-increased,
    /// directional-decreased, s-equals-u-directional, or selected
    #[arg(long, value_name = "NAME")]
    pub scenario: Option<String>,

    /// Direction in which selection shifts outcome risk in both exposure
    /// groups: increased or decreased
    #[arg(long, value_name = "DIR")]
    pub direction: Option<String>,

    #[command(flatten)]
    pub params: ParamArgs,

    /// Observed point estimate to adjust
    #[arg(long, value_name = "VALUE")]
    pub est: Option<f64>,

    /// Lower confidence limit of the estimate
    #[arg(long, value_name = "VALUE")]
    pub lo: Option<f64>,

    /// Upper confidence limit of the estimate, or inf
    #[arg(long, value_name = "VALUE")]
    pub hi: Option<String>,

    /// Scale the estimate was reported on: rr, or, hr
    #[arg(long, value_name = "SCALE")]
    pub scale: Option<String>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Assumption set to verify: general, s-equals-u, directional-increased,
    /// directional-decreased, s-equals-u-directional, or selected
    #[arg(long, value_name = "NAME")]
    pub scenario: Option<String>,

    /// Direction variant for the directional scenarios: increased or decreased
    #[arg(long, value_name = "DIR")]
    pub direction: Option<String>,

    /// Number of levels of the unmeasured factor, 2 to 8 [default: 2]
    #[arg(long, value_name = "K")]
    pub k: Option<usize>,

    /// Distributions to check, or search evaluations with --search [default: 100000]
    #[arg(long, value_name = "N")]
    pub n: Option<u64>,

    /// Base seed; the whole report is reproducible from it [default: 0]
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Hill-climb toward the bound instead of sampling at random
    #[arg(long)]
    pub search: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Prints help or version to stdout (exit 0) and usage errors to
        // stderr (exit 2).
        Err(e) => e.exit(),
    };
    match commands::run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.exit)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
