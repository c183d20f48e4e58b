mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, ConfigError, Format, RunConfig};
use durrmeyer::harness::{
    all_passed, build_suite, check_lemma, kfunc_rows, merge_and_sort, norm_monotonicity_report,
    operator_norm_report, report_all, verify_converse_suite, verify_direct_suite,
    verify_proposition_suite, write_csv, write_json, CheckReport, LemmaGrid, LemmaId, NRange,
    OperatorKind,
};
use durrmeyer::quadrature::Exponent;
use durrmeyer::spectrum::WeightConfig;
use durrmeyer::Error;

enum Failure {
    Config(String),
    Numerical(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidWeight(_) | Error::Usage(_) | Error::Domain(_) => Failure::Config(e.to_string()),
            other => Failure::Numerical(other),
        }
    }
}

fn ns_or(cfg: &RunConfig, default: NRange) -> Result<Vec<usize>, Failure> {
    Ok(cfg.n_range.unwrap_or(default).values()?)
}

fn ps_or(cfg: &RunConfig, default: &[Exponent]) -> Vec<Exponent> {
    cfg.ps.clone().unwrap_or_else(|| default.to_vec())
}

fn weight(cfg: &RunConfig) -> WeightConfig {
    cfg.weight.clone().unwrap_or_else(|| WeightConfig::unweighted(1))
}

fn lemmas(cfg: &RunConfig) -> Result<Vec<CheckReport>, Failure> {
    let user_ns = cfg.n_range.map(|r| r.values()).transpose()?;
    let mut out = Vec::new();
    for id in LemmaId::ALL {
        let mut grid = LemmaGrid::defaults(id);
        if let Some(w) = &cfg.weight {
            if id.requires_nonnegative_rho() && w.rho() < 0.0 {
                eprintln!("skipping {id}: stated for rho >= 0, got rho = {}", w.rho());
                continue;
            }
            grid.rhos = vec![w.rho()];
        }
        if let Some(ns) = &user_ns {
            if ns.iter().all(|&n| n < id.min_n()) {
                eprintln!("skipping {id}: needs n >= {}", id.min_n());
                continue;
            }
            grid.ns = ns.clone();
        }
        out.push(check_lemma(id, &grid, &cfg.opts)?);
    }
    Ok(out)
}

fn run(cfg: &RunConfig) -> Result<Vec<CheckReport>, Failure> {
    let all_p = [Exponent::ONE, Exponent::TWO, Exponent::Infinity];
    let opts = &cfg.opts;
    let suite = || build_suite(&weight(cfg), cfg.suite, opts.seed);
    let reports = match cfg.command {
        Command::VerifyLemmas => lemmas(cfg)?,
        Command::VerifyDirect => {
            let ns = ns_or(cfg, NRange::dyadic(4, 64))?;
            vec![verify_direct_suite(&suite()?, &ps_or(cfg, &all_p), &ns, opts)?]
        }
        Command::VerifyConverse => {
            let ns = ns_or(cfg, NRange::dyadic(4, 64))?;
            verify_converse_suite(&suite()?, &ps_or(cfg, &all_p), &ns, opts)?
        }
        Command::VerifyProposition => {
            let ns = ns_or(cfg, NRange::dyadic(4, 128))?;
            verify_proposition_suite(&suite()?, &ps_or(cfg, &[Exponent::TWO]), &ns, opts)?
        }
        Command::Kfunc => {
            let ns = ns_or(cfg, NRange::dyadic(4, 64))?;
            kfunc_rows(&suite()?, &ps_or(cfg, &[Exponent::TWO]), &ns, opts)?
        }
        Command::Norms => {
            let ns = ns_or(cfg, NRange::dyadic(4, 64))?;
            let ps = ps_or(cfg, &[Exponent::ONE, Exponent::TWO, Exponent::finite(3.0)?, Exponent::Infinity]);
            let w = weight(cfg);
            let mut out = Vec::new();
            if ps.len() > 1 {
                out.push(norm_monotonicity_report(&suite()?, &ps, opts)?);
            }
            for p in &ps {
                if w.dim() == 1 {
                    out.push(operator_norm_report(OperatorKind::PartialSum, &w, *p, &ns, opts)?);
                }
                out.push(operator_norm_report(OperatorKind::Cesaro, &w, *p, &ns, opts)?);
            }
            out
        }
        Command::ReportAll => return Ok(report_all(opts)?),
    };
    Ok(merge_and_sort(reports))
}

fn write(cfg: &RunConfig, reports: &[CheckReport]) -> Result<(), Failure> {
    let sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(
            File::create(path).map_err(|e| Failure::Config(format!("cannot create {}: {e}", path.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let sink = BufWriter::new(sink);
    match cfg.format {
        Format::Csv => write_csv(reports, sink)?,
        Format::Json => write_json(reports, sink)?,
    }
    Ok(())
}

fn summarize(reports: &[CheckReport]) {
    for r in reports {
        let status = match (r.asserted, r.passed) {
            (false, _) => "info",
            (true, true) => "pass",
            (true, false) => "FAIL",
        };
        let constant = r.empirical_constant.map(|c| format!(", constant {c:.6}")).unwrap_or_default();
        eprintln!(
            "{status:>4}  {:<16} worst margin {:.3e}, {} rows{constant}",
            r.check_id,
            r.worst_margin,
            r.rows.len()
        );
    }
    for r in reports.iter().filter(|r| r.asserted && !r.passed) {
        for row in r.failures().take(3) {
            eprintln!(
                "      {} rho = {} n = {} at = {} f = {}: lhs {:.6e} rhs {:.6e} margin {:.3e}",
                row.check_id,
                row.rho,
                row.n.map(|n| n.to_string()).unwrap_or_default(),
                row.ell_or_tau.map(|t| t.to_string()).unwrap_or_default(),
                row.f_id.as_deref().unwrap_or(""),
                row.lhs,
                row.rhs,
                row.margin
            );
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = RunConfig::resolve(cli).map_err(Failure::from).and_then(|cfg| {
        let reports = run(&cfg)?;
        write(&cfg, &reports)?;
        Ok(reports)
    });
    match outcome {
        Ok(reports) => {
            summarize(&reports);
            if all_passed(&reports) {
                ExitCode::SUCCESS
            } else {
                let failed = reports.iter().filter(|r| r.asserted && !r.passed).count();
                eprintln!("{failed} asserted check(s) failed");
                ExitCode::from(1)
            }
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
