//! Command implementations: option merging, strict per-scenario parameter
//! checking, and calls into the library. Rendering lives in [`crate::render`].

use selbias::oracle::{tightness_search, verify_batch};
use selbias::{
    adjust_estimate, bounding_factor, summary_for, Direction, EffectEstimate, Error, LimitChoice,
    RiskRatio, Scale, Scenario, ScenarioParams, SelectedAssociation, Target, UpperLimit,
};

use crate::config::{self, FileConfig};
use crate::render::{self, BoundView, Format, SummaryLine, SvalueView, TableRow, TableView, VerifyView};
use crate::{AdjustArgs, AnalysisArgs, Cli, Command, ParamArgs, SvalueArgs, VerifyArgs};

pub struct CmdOutput {
    pub text: String,
    pub exit: u8,
}

struct Ctx {
    cfg: FileConfig,
    format: Format,
    precision: usize,
}

fn lib(e: Error) -> String {
    e.to_string()
}

pub fn run(cli: Cli) -> Result<CmdOutput, String> {
    let cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => FileConfig::empty(),
    };
    let format = match cli.output.or(cfg.string("output")?) {
        None => Format::Text,
        Some(name) => render::parse_format(&name)?,
    };
    let precision = match cli.precision {
        Some(p) => p,
        None => cfg.integer("precision")?.map_or(2, |v| v as usize),
    };
    let ctx = Ctx {
        cfg,
        format,
        precision,
    };
    match cli.command {
        Command::Bound(args) => cmd_bound(&ctx, args),
        Command::Svalue(args) => cmd_svalue(&ctx, args),
        Command::Adjust(args) => cmd_adjust(&ctx, args),
        Command::Table(args) => cmd_table(&ctx, args),
        Command::Verify(args) => cmd_verify(&ctx, args),
    }
}

fn resolve_scenario(
    ctx: &Ctx,
    scenario: Option<String>,
    direction: Option<String>,
) -> Result<Scenario, String> {
    let name = match scenario.or(ctx.cfg.string("scenario")?) {
        Some(n) => n,
        None => {
            return Err(
                "a scenario is required; pass --scenario or set \"scenario\" in the config file"
                    .into(),
            )
        }
    };
    let base: Scenario = name.parse().map_err(lib)?;
    let dir = match direction.or(ctx.cfg.string("direction")?) {
        Some(d) => Some(d.parse::<Direction>().map_err(lib)?),
        None => None,
    };
    match (base, dir) {
        (s, None) => Ok(s),
        // The scenario name is direction-blind here, so the flag decides.
        (Scenario::SEqualsUDirectional(_), Some(d)) => Ok(Scenario::SEqualsUDirectional(d)),
        (Scenario::Directional(d0), Some(d)) => {
            if d0 == d {
                Ok(base)
            } else {
                Err(format!(
                    "--direction {d} conflicts with scenario {base}, which already fixes the direction"
                ))
            }
        }
        (s, Some(_)) => Err(format!("--direction does not apply to scenario {s}")),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Source {
    Flag,
    Config,
}

struct Provided {
    name: &'static str,
    raw: String,
    source: Source,
}

fn collect_params(ctx: &Ctx, p: &ParamArgs) -> Result<Vec<Provided>, String> {
    let flags: [(&'static str, &Option<String>); 10] = [
        ("rr-uy-a1", &p.rr_uy_a1),
        ("rr-su-a1", &p.rr_su_a1),
        ("rr-uy-a0", &p.rr_uy_a0),
        ("rr-su-a0", &p.rr_su_a0),
        ("rr-uy", &p.rr_uy),
        ("rr-su", &p.rr_su),
        ("rr-uy-s1", &p.rr_uy_s1),
        ("rr-au-s1", &p.rr_au_s1),
        ("approx-su", &p.approx_su),
        ("approx-sa", &p.approx_sa),
    ];
    let mut out = Vec::new();
    for (name, flag) in flags {
        if let Some(raw) = flag {
            out.push(Provided {
                name,
                raw: raw.clone(),
                source: Source::Flag,
            });
        } else if let Some(raw) = ctx.cfg.raw(name)? {
            out.push(Provided {
                name,
                raw,
                source: Source::Config,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct RangeSpec {
    min: f64,
    max: f64,
    steps: usize,
}

#[derive(Clone, Copy)]
enum ValueOrRange {
    Value(f64),
    Range(RangeSpec),
}

fn parse_value_or_range(name: &str, raw: &str) -> Result<ValueOrRange, String> {
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            return Err(format!(
                "--{name}: a range is written min:max:steps (got {raw:?})"
            ));
        }
        let min: f64 = parts[0]
            .parse()
            .map_err(|_| format!("--{name}: range minimum {:?} is not a number", parts[0]))?;
        let max: f64 = parts[1]
            .parse()
            .map_err(|_| format!("--{name}: range maximum {:?} is not a number", parts[1]))?;
        let steps: usize = parts[2].parse().map_err(|_| {
            format!("--{name}: range steps {:?} is not a whole number", parts[2])
        })?;
        if !min.is_finite() || !max.is_finite() {
            return Err(format!("--{name}: range endpoints must be finite"));
        }
        if min < 1.0 {
            return Err(format!(
                "--{name}: range minimum must be at least 1 (got {min})"
            ));
        }
        if min > max {
            return Err(format!(
                "--{name}: range minimum {min} exceeds maximum {max}"
            ));
        }
        if steps < 2 {
            return Err(format!("--{name}: a range needs at least 2 steps"));
        }
        Ok(ValueOrRange::Range(RangeSpec { min, max, steps }))
    } else {
        let v: f64 = raw
            .parse()
            .map_err(|_| format!("--{name}: {raw:?} is not a number"))?;
        Ok(ValueOrRange::Value(v))
    }
}

const ASSOCIATION_KEYS: [&str; 3] = ["rr-au-s1", "approx-su", "approx-sa"];

fn required_names(scenario: Scenario) -> &'static [&'static str] {
    match scenario {
        Scenario::General => &["rr-uy-a1", "rr-su-a1", "rr-uy-a0", "rr-su-a0"],
        Scenario::SEqualsU => &["rr-uy-a1", "rr-uy-a0"],
        Scenario::Directional(_) => &["rr-uy", "rr-su"],
        Scenario::SEqualsUDirectional(_) => &["rr-uy"],
        Scenario::SelectedPopulation => &["rr-uy-s1"],
    }
}

type ParamMaker = Box<dyn Fn(&[f64]) -> ScenarioParams>;

/// Resolves which parameters the scenario uses, in canonical order, and how
/// to assemble them. Flags naming parameters the scenario has no use for are
/// rejected; config keys in the same position are ignored, since one config
/// file may serve several scenarios.
fn param_spec(
    scenario: Scenario,
    provided: &[Provided],
) -> Result<(Vec<(&'static str, ValueOrRange)>, ParamMaker), String> {
    let required = required_names(scenario);
    let selected = scenario == Scenario::SelectedPopulation;
    for p in provided {
        let applies =
            required.contains(&p.name) || (selected && ASSOCIATION_KEYS.contains(&p.name));
        if !applies && p.source == Source::Flag {
            return Err(format!("--{} does not apply to scenario {scenario}", p.name));
        }
    }
    let lookup = |name: &str| provided.iter().find(|p| p.name == name);
    let mut names: Vec<&'static str> = Vec::new();
    for &name in required {
        if lookup(name).is_none() {
            return Err(format!("scenario {scenario} requires --{name}"));
        }
        names.push(name);
    }
    let mut assoc_name: Option<&'static str> = None;
    if selected {
        let given = |source| {
            ASSOCIATION_KEYS
                .iter()
                .filter(|&&k| lookup(k).is_some_and(|p| p.source == source))
                .copied()
                .collect::<Vec<_>>()
        };
        let from_flags = given(Source::Flag);
        let chosen = if from_flags.is_empty() {
            given(Source::Config)
        } else {
            from_flags
        };
        match chosen.as_slice() {
            [] => {
                return Err(format!(
                    "scenario {scenario} needs exactly one of --rr-au-s1, --approx-su, --approx-sa"
                ))
            }
            [one] => {
                // Const slices keep the names 'static.
                let stable = ASSOCIATION_KEYS
                    .iter()
                    .find(|&&k| k == *one)
                    .copied()
                    .expect("chosen from this list");
                assoc_name = Some(stable);
                names.push(stable);
            }
            several => {
                return Err(format!(
                    "pass exactly one of --rr-au-s1, --approx-su, --approx-sa (got {})",
                    several.join(", ")
                ))
            }
        }
    }
    let spec: Vec<(&'static str, ValueOrRange)> = names
        .iter()
        .map(|&name| {
            let p = lookup(name).expect("presence checked above");
            parse_value_or_range(name, &p.raw).map(|v| (name, v))
        })
        .collect::<Result<_, _>>()?;
    let maker: ParamMaker = match scenario {
        Scenario::General => Box::new(|v| ScenarioParams::General {
            rr_uy_a1: v[0],
            rr_su_a1: v[1],
            rr_uy_a0: v[2],
            rr_su_a0: v[3],
        }),
        Scenario::SEqualsU => Box::new(|v| ScenarioParams::SEqualsU {
            rr_uy_a1: v[0],
            rr_uy_a0: v[1],
        }),
        Scenario::Directional(direction) => Box::new(move |v| ScenarioParams::Directional {
            direction,
            rr_uy: v[0],
            rr_su: v[1],
        }),
        Scenario::SEqualsUDirectional(direction) => {
            Box::new(move |v| ScenarioParams::SEqualsUDirectional {
                direction,
                rr_uy: v[0],
            })
        }
        Scenario::SelectedPopulation => {
            let assoc = assoc_name.expect("selected scenario resolved an association");
            Box::new(move |v| ScenarioParams::SelectedPopulation {
                rr_uy_s1: v[0],
                association: match assoc {
                    "rr-au-s1" => SelectedAssociation::Exact(v[1]),
                    "approx-su" => SelectedAssociation::ApproxSu(v[1]),
                    _ => SelectedAssociation::ApproxSa(v[1]),
                },
            })
        }
    };
    Ok((spec, maker))
}

fn scalar_values(spec: &[(&'static str, ValueOrRange)]) -> Result<Vec<f64>, String> {
    spec.iter()
        .map(|(name, v)| match v {
            ValueOrRange::Value(x) => Ok(*x),
            ValueOrRange::Range(_) => {
                Err(format!("--{name}: ranges only apply to the table command"))
            }
        })
        .collect()
}

fn parse_scale(scale: Option<String>) -> Result<Scale, String> {
    match scale.as_deref() {
        None | Some("rr") => Ok(Scale::RiskRatio),
        Some("or") => Ok(Scale::OddsRatioApprox),
        Some("hr") => Ok(Scale::HazardRatioApprox),
        Some(other) => Err(format!("unknown scale {other:?}; expected rr, or, or hr")),
    }
}

fn build_estimate(
    ctx: &Ctx,
    est: Option<f64>,
    lo: Option<f64>,
    hi: Option<String>,
    scale: Option<String>,
) -> Result<Option<EffectEstimate>, String> {
    let est = est.or(ctx.cfg.number("est")?);
    let lo = lo.or(ctx.cfg.number("lo")?);
    let hi = hi.or(ctx.cfg.raw("hi")?);
    let scale = parse_scale(scale.or(ctx.cfg.string("scale")?))?;
    let Some(point) = est else {
        if lo.is_some() || hi.is_some() {
            return Err("--lo and --hi describe an estimate; pass --est too".into());
        }
        return Ok(None);
    };
    let point = RiskRatio::new(point).map_err(|e| format!("--est: {}", lib(e)))?;
    let lower = lo
        .map(RiskRatio::new)
        .transpose()
        .map_err(|e| format!("--lo: {}", lib(e)))?;
    let upper = match hi.as_deref() {
        None => None,
        Some(s) => {
            let v: f64 = s
                .parse()
                .map_err(|_| format!("--hi: {s:?} is not a number or inf"))?;
            if v.is_infinite() && v > 0.0 {
                Some(UpperLimit::Unbounded)
            } else {
                Some(UpperLimit::Finite(
                    RiskRatio::new(v).map_err(|e| format!("--hi: {}", lib(e)))?,
                ))
            }
        }
    };
    EffectEstimate::new(point, lower, upper, scale)
        .map(Some)
        .map_err(lib)
}

/// Points below 1 flip to the reciprocal coding so division by the bound
/// moves them toward the null rather than beyond it.
fn orient(estimate: Option<EffectEstimate>) -> (Option<EffectEstimate>, bool) {
    match estimate {
        Some(e) if e.point().value() < 1.0 => (Some(e.reciprocal()), true),
        e => (e, false),
    }
}

fn cmd_bound(ctx: &Ctx, args: AnalysisArgs) -> Result<CmdOutput, String> {
    let scenario = resolve_scenario(ctx, args.scenario, args.direction)?;
    let provided = collect_params(ctx, &args.params)?;
    let (spec, make) = param_spec(scenario, &provided)?;
    let values = scalar_values(&spec)?;
    let bound = bounding_factor(make(&values)).map_err(lib)?;
    let estimate = build_estimate(ctx, args.est, args.lo, args.hi, args.scale)?;
    let (oriented, recoded) = orient(estimate);
    let adjusted = oriented.map(|e| adjust_estimate(e, bound));
    let params: Vec<(&'static str, f64)> =
        spec.iter().map(|&(name, _)| name).zip(values).collect();
    let view = BoundView {
        scenario,
        show_scenario: true,
        params: &params,
        label: "bounding factor",
        bound: bound.value(),
        approximate: bound.approximate(),
        estimate,
        recoded,
        adjusted,
    };
    Ok(CmdOutput {
        text: render::bound(ctx.format, ctx.precision, &view),
        exit: 0,
    })
}

fn cmd_adjust(ctx: &Ctx, args: AdjustArgs) -> Result<CmdOutput, String> {
    let provided = collect_params(ctx, &args.params)?;
    let has_flag_params = provided.iter().any(|p| p.source == Source::Flag);
    if args.bound.is_some() && (args.scenario.is_some() || has_flag_params) {
        return Err("pass either --bound or a scenario with its parameters, not both".into());
    }
    let estimate = build_estimate(ctx, args.est, args.lo, args.hi, args.scale)?
        .ok_or("adjust needs --est")?;
    let (oriented, recoded) = orient(Some(estimate));
    let oriented = oriented.expect("estimate present");
    // Flags outrank config; within a tier a direct bound outranks a scenario.
    let use_direct = args.bound.is_some()
        || (args.scenario.is_none() && !has_flag_params && ctx.cfg.number("bound")?.is_some());
    let (view_scenario, params, bound) = if use_direct {
        let b = match args.bound {
            Some(b) => b,
            None => ctx.cfg.number("bound")?.expect("checked above"),
        };
        if !(b.is_finite() && b >= 1.0) {
            return Err(format!("--bound must be a finite value >= 1 (got {b})"));
        }
        // A direct bound is applied as-is; the identity-form parameter set
        // carries it through the shared machinery.
        let bf = bounding_factor(ScenarioParams::SEqualsUDirectional {
            direction: Direction::Increased,
            rr_uy: b,
        })
        .expect("validated directly above");
        (None, Vec::new(), bf)
    } else {
        let scenario = resolve_scenario(ctx, args.scenario, args.direction).map_err(|e| {
            if e.starts_with("a scenario is required") {
                "adjust needs either --bound or a scenario with its parameters".to_string()
            } else {
                e
            }
        })?;
        let (spec, make) = param_spec(scenario, &provided)?;
        let values = scalar_values(&spec)?;
        let bf = bounding_factor(make(&values)).map_err(lib)?;
        let params: Vec<(&'static str, f64)> =
            spec.iter().map(|&(name, _)| name).zip(values).collect();
        (Some(scenario), params, bf)
    };
    let adjusted = adjust_estimate(oriented, bound);
    let view = BoundView {
        scenario: view_scenario.unwrap_or(Scenario::General),
        show_scenario: view_scenario.is_some(),
        params: &params,
        label: "bound",
        bound: bound.value(),
        approximate: bound.approximate(),
        estimate: Some(estimate),
        recoded,
        adjusted: Some(adjusted),
    };
    Ok(CmdOutput {
        text: render::bound(ctx.format, ctx.precision, &view),
        exit: 0,
    })
}

fn cmd_svalue(ctx: &Ctx, args: SvalueArgs) -> Result<CmdOutput, String> {
    let scenario = resolve_scenario(ctx, args.scenario, args.direction)?;
    let estimate = build_estimate(ctx, args.est, args.lo, args.hi, args.scale)?
        .ok_or("svalue needs --est")?;
    let target_value = args.true_value.or(ctx.cfg.number("true")?);
    let target = match target_value {
        None => Target::Null,
        Some(v) => Target::TrueValue(
            RiskRatio::new(v).map_err(|e| format!("--true: {}", lib(e)))?,
        ),
    };
    let t = target_value.unwrap_or(1.0);
    let point = summary_for(scenario, &estimate, target, LimitChoice::Point).map_err(lib)?;
    let point_line = SummaryLine {
        which: "point",
        input_rr: point.input_rr,
        value: point.value,
        recoded: point.recoded,
        crossed: false,
    };
    let p = estimate.point().value();
    let no_interval = estimate.lower().is_none() && estimate.upper().is_none();
    let limit_line = if no_interval {
        None
    } else if p >= t {
        // The lower limit is the side that could already reach a target at
        // or below the point.
        match estimate.lower() {
            None => {
                return Err(
                    "the target lies at or below the point estimate, so the lower limit is \
                     summarized; pass --lo"
                        .into(),
                )
            }
            Some(l) if l.value() < t => Some(SummaryLine {
                which: "lower",
                input_rr: l.value(),
                value: 1.0,
                recoded: false,
                crossed: true,
            }),
            Some(_) => {
                let m = summary_for(scenario, &estimate, target, LimitChoice::Lower).map_err(lib)?;
                Some(SummaryLine {
                    which: "lower",
                    input_rr: m.input_rr,
                    value: m.value,
                    recoded: m.recoded,
                    crossed: false,
                })
            }
        }
    } else {
        match estimate.upper() {
            None => {
                return Err(
                    "the target lies above the point estimate, so the upper limit is \
                     summarized; pass --hi"
                        .into(),
                )
            }
            Some(UpperLimit::Unbounded) => Some(SummaryLine {
                which: "upper",
                input_rr: f64::INFINITY,
                value: 1.0,
                recoded: false,
                crossed: true,
            }),
            Some(UpperLimit::Finite(u)) if u.value() > t => Some(SummaryLine {
                which: "upper",
                input_rr: u.value(),
                value: 1.0,
                recoded: false,
                crossed: true,
            }),
            Some(UpperLimit::Finite(_)) => {
                let m = summary_for(scenario, &estimate, target, LimitChoice::Upper).map_err(lib)?;
                Some(SummaryLine {
                    which: "upper",
                    input_rr: m.input_rr,
                    value: m.value,
                    recoded: m.recoded,
                    crossed: false,
                })
            }
        }
    };
    let view = SvalueView {
        scenario,
        target: target_value,
        scale: estimate.scale(),
        point: point_line,
        limit: limit_line,
    };
    Ok(CmdOutput {
        text: render::svalue(ctx.format, ctx.precision, &view),
        exit: 0,
    })
}

fn linspace(r: RangeSpec) -> Vec<f64> {
    let n = r.steps;
    (0..n)
        .map(|i| {
            if i + 1 == n {
                // The closed endpoint is exact rather than accumulated.
                r.max
            } else {
                r.min + (r.max - r.min) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn cmd_table(ctx: &Ctx, args: AnalysisArgs) -> Result<CmdOutput, String> {
    let scenario = resolve_scenario(ctx, args.scenario, args.direction)?;
    let provided = collect_params(ctx, &args.params)?;
    let (spec, make) = param_spec(scenario, &provided)?;
    if !spec
        .iter()
        .any(|(_, v)| matches!(v, ValueOrRange::Range(_)))
    {
        return Err(
            "table needs at least one ranged parameter, written min:max:steps (like --rr-uy 1:4:7)"
                .into(),
        );
    }
    let axes: Vec<Vec<f64>> = spec
        .iter()
        .map(|(_, v)| match v {
            ValueOrRange::Value(x) => vec![*x],
            ValueOrRange::Range(r) => linspace(*r),
        })
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();
    if total > 100_000 {
        return Err(format!(
            "the grid has {total} rows; keep it at or under 100000"
        ));
    }
    let estimate = build_estimate(ctx, args.est, args.lo, args.hi, args.scale)?;
    let (oriented, recoded) = orient(estimate);
    let mut rows = Vec::with_capacity(total);
    let mut approximate = false;
    let mut idx = vec![0usize; axes.len()];
    'grid: loop {
        let values: Vec<f64> = idx.iter().zip(&axes).map(|(&i, ax)| ax[i]).collect();
        let bound = bounding_factor(make(&values)).map_err(lib)?;
        approximate |= bound.approximate();
        rows.push(TableRow {
            adjusted: oriented.map(|e| adjust_estimate(e, bound)),
            bound: bound.value(),
            params: values,
        });
        // Odometer increment, last axis fastest, so the first parameter
        // varies slowest.
        let mut pos = axes.len();
        loop {
            if pos == 0 {
                break 'grid;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < axes[pos].len() {
                continue 'grid;
            }
            idx[pos] = 0;
        }
    }
    let names: Vec<&'static str> = spec.iter().map(|&(name, _)| name).collect();
    let view = TableView {
        scenario,
        approximate,
        recoded,
        estimate,
        param_names: &names,
        rows: &rows,
    };
    Ok(CmdOutput {
        text: render::table(ctx.format, ctx.precision, &view),
        exit: 0,
    })
}

fn cmd_verify(ctx: &Ctx, args: VerifyArgs) -> Result<CmdOutput, String> {
    let scenario = resolve_scenario(ctx, args.scenario, args.direction)?;
    let k = match args.k {
        Some(k) => k,
        None => ctx.cfg.integer("k")?.map_or(2, |v| v as usize),
    };
    let n = match args.n {
        Some(n) => n,
        None => ctx.cfg.integer("n")?.unwrap_or(100_000),
    };
    let seed = match args.seed {
        Some(s) => s,
        None => ctx.cfg.integer("seed")?.unwrap_or(0),
    };
    let search = args.search || ctx.cfg.boolean("search")?.unwrap_or(false);
    let report = if search {
        tightness_search(k, scenario, n, seed)
    } else {
        verify_batch(k, scenario, n, seed)
    }
    .map_err(lib)?;
    let exit = if report.violations > 0 { 3 } else { 0 };
    let view = VerifyView {
        scenario,
        k,
        n,
        search,
        report: &report,
    };
    Ok(CmdOutput {
        text: render::verify(ctx.format, ctx.precision, &view),
        exit,
    })
}
