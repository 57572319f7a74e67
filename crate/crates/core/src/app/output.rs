use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::sss::SpreadScanTable;

use super::{GridRow, LevelRow, P0Sweep, RunConfig, StudyRun};

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<PathBuf> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(path.to_path_buf())
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

pub(super) fn config_header(config: &RunConfig) -> String {
    format!("# config {}\n", config.to_json_line())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(super) fn levels_csv(header: &str, rows: &[LevelRow]) -> String {
    let mut s = header.to_string();
    s.push_str("j,b_j,n_j,n_samples,rho_j,gamma_j,sigma_schedule\n");
    for r in rows {
        let sched: Vec<String> = r.sigma_schedule.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.j,
            r.b_j,
            r.n_j,
            r.n_samples,
            opt(r.rho_j),
            opt(r.gamma_j),
            sched.join(";")
        );
    }
    s
}

pub(super) fn grid_csv(header: &str, rows: &[GridRow], exact: bool) -> String {
    let mut s = header.to_string();
    s.push_str(if exact { "p,fan_density,exact_density\n" } else { "p,fan_density\n" });
    for (p, fan, ex) in rows {
        if exact {
            let _ = writeln!(s, "{p:e},{fan:e},{}", ex.map(|v| format!("{v:e}")).unwrap_or_default());
        } else {
            let _ = writeln!(s, "{p:e},{fan:e}");
        }
    }
    s
}

pub(super) fn study_csv(header: &str, runs: &[StudyRun]) -> String {
    let mut s = header.to_string();
    s.push_str("index,seed,estimate,m,converged,posterior_mean,posterior_cov,evaluations,error\n");
    for r in runs {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.index,
            r.seed,
            opt(r.estimate),
            r.m.map(|m| m.to_string()).unwrap_or_default(),
            r.converged.map(|c| c.to_string()).unwrap_or_default(),
            opt(r.posterior_mean),
            opt(r.posterior_cov),
            r.evaluations.map(|e| e.to_string()).unwrap_or_default(),
            r.error.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    s
}

pub(super) fn p0_csv(sweep: &P0Sweep) -> String {
    let mut s = format!("# pf {} n_total {}\n", sweep.pf, sweep.n_total);
    s.push_str("gamma_bar,p0,delta,argmin\n");
    for r in &sweep.rows {
        let _ = writeln!(s, "{},{},{},{}", r.gamma_bar, r.p0, r.delta, r.is_argmin as u8);
    }
    for (g, p) in &sweep.optimum {
        let _ = writeln!(s, "# optimum gamma_bar {g} p0 {p}");
    }
    s
}

pub(super) fn scan_csv(header: &str, table: &SpreadScanTable) -> String {
    let mut s = header.to_string();
    let _ = writeln!(s, "# level {}", table.level);
    s.push_str("sigma,gamma,gamma_se,rho,repetitions\n");
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.sigma,
            opt(r.gamma),
            opt(r.gamma_se),
            r.acceptance_rate,
            r.defined_repetitions
        );
    }
    if let Some(best) = table.argmin {
        let row = table.rows.iter().find(|r| r.sigma == best).expect("argmin is a row");
        let _ = writeln!(s, "argmin,{},{},{}", best, opt(row.gamma), row.acceptance_rate);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = log_grid(1e-5, 1e-1, 512);
        assert_eq!(g.len(), 512);
        assert_eq!(g[0], 1e-5);
        assert_eq!(g[511], 1e-1);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
