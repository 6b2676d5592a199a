//! Per-tick metric records, run summaries and CSV emission.
//!
//! CSV files are plain RFC-4180 (comma-separated, header row, `\n` line
//! ends, no quoting needed for any emitted value). Floating-point
//! columns carry 6 significant digits. Column orders are fixed:
//!
//! `trace.csv`: tick, sim_time_m, coverage_percent, map_entropy,
//! algebraic_connectivity, average_degree, tree_connectivity,
//! graph_uncertainty, node_count, edge_count, selected_x, selected_y
//! (selected columns empty when no frontier was chosen that tick).
//!
//! `scores.csv`: tick, centroid_x, centroid_y, e_n, k_n, gamma_n, u1,
//! beta, rho, u2, u_tot, distance_m, reachable.
//!
//! `summary.csv`: method, seed, status, final_coverage,
//! algebraic_connectivity, average_degree, tree_connectivity, ssim,
//! ssim_masked, rmse, d_opt_max, d_opt_min, percent_r.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::MapError;
use crate::graph::{
    algebraic_connectivity, average_degree, graph_uncertainty, normalized_tree_connectivity,
};
use crate::grid::{coverage_percent_masked, map_entropy, Cell, OccupancyGrid};
use crate::sim::SimState;
use crate::utility::CandidateScore;

/// Metrics snapshot of one decision tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: usize,
    /// Cumulative distance traveled, meters (the physical-time proxy).
    pub sim_time_m: f64,
    pub coverage_percent: f64,
    pub map_entropy: f64,
    /// 0.0 while the graph has fewer than two nodes.
    pub algebraic_connectivity: f64,
    pub average_degree: f64,
    /// 0.0 while the graph has fewer than two nodes.
    pub tree_connectivity: f64,
    /// Mean edge D-optimality; 0.0 while the graph has no edges.
    pub graph_uncertainty: f64,
    pub node_count: usize,
    pub edge_count: usize,
    pub selected_frontier: Option<Cell>,
}

/// One frontier candidate's scores at one tick (CSV-ready slice of a
/// [`CandidateScore`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub tick: usize,
    pub centroid: Cell,
    pub e_n: f64,
    pub k_n: usize,
    pub gamma_n: f64,
    pub u1: f64,
    pub beta: u32,
    pub rho: f64,
    pub u2: f64,
    pub u_tot: f64,
    pub distance_m: f64,
    pub reachable: bool,
}

impl ScoreRecord {
    pub fn from_score(tick: usize, s: &CandidateScore) -> Self {
        ScoreRecord {
            tick,
            centroid: s.frontier.centroid,
            e_n: s.e_n,
            k_n: s.k_n,
            gamma_n: s.gamma_n,
            u1: s.u1,
            beta: s.beta,
            rho: s.rho,
            u2: s.u2,
            u_tot: s.u_tot,
            distance_m: s.distance_m,
            reachable: s.reachable,
        }
    }
}

/// Chronological record of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TickRecord>,
    pub scores: Vec<ScoreRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }
}

/// Append one [`TickRecord`] computed from the current state.
pub fn record_tick(
    trace: &mut Trace,
    state: &SimState,
    truth_reachable: &[bool],
    traveled_m: f64,
    selected: Option<Cell>,
) {
    let graph = &state.graph;
    let n = graph.node_count();
    let record = TickRecord {
        tick: state.tick,
        sim_time_m: traveled_m,
        coverage_percent: coverage_percent_masked(&state.belief, truth_reachable),
        map_entropy: map_entropy(&state.belief),
        algebraic_connectivity: if n >= 2 {
            algebraic_connectivity(graph).unwrap_or(0.0)
        } else {
            0.0
        },
        average_degree: average_degree(graph),
        tree_connectivity: if n >= 2 {
            normalized_tree_connectivity(graph).unwrap_or(0.0)
        } else {
            0.0
        },
        graph_uncertainty: if graph.edge_count() > 0 {
            graph_uncertainty(graph).unwrap_or(0.0)
        } else {
            0.0
        },
        node_count: n,
        edge_count: graph.edge_count(),
        selected_frontier: selected,
    };
    trace.records.push(record);
}

/// Aggregate statistics of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub method: String,
    pub seed: u64,
    pub status: String,
    pub final_coverage: f64,
    pub final_algebraic_connectivity: f64,
    pub final_average_degree: f64,
    pub final_tree_connectivity: f64,
    /// SSIM of the final belief against the truth over all windows.
    pub ssim: f64,
    /// SSIM restricted to windows centered on observed belief cells.
    pub ssim_masked: f64,
    pub rmse: f64,
    /// Extremes of the per-tick mean edge D-optimality, over ticks that
    /// had at least one edge.
    pub d_opt_max: f64,
    pub d_opt_min: f64,
    /// Uncertainty reduction `100 * (max - min) / max`, in `[0, 100]`.
    pub percent_r: f64,
}

/// `100 * (max - min) / max`; 0 when max is not positive.
pub fn percent_reduction(d_opt_max: f64, d_opt_min: f64) -> f64 {
    if d_opt_max > 0.0 {
        100.0 * (d_opt_max - d_opt_min) / d_opt_max
    } else {
        0.0
    }
}

/// Summarize a finished run: final metrics from the last record, map
/// quality of the final belief against the truth, and the uncertainty
/// extremes driving the percent-reduction statistic.
pub fn summarize(
    trace: &Trace,
    belief: &OccupancyGrid,
    truth: &OccupancyGrid,
    method: &str,
    seed: u64,
    status: &str,
    ssim_window: usize,
) -> Result<RunSummary, MapError> {
    let last = trace.records.last().ok_or(MapError::EmptyTrace)?;
    let with_edges = trace.records.iter().filter(|r| r.edge_count > 0);
    let d_opt_max = with_edges
        .clone()
        .map(|r| r.graph_uncertainty)
        .fold(0.0f64, f64::max);
    let d_opt_min = with_edges
        .map(|r| r.graph_uncertainty)
        .fold(f64::INFINITY, f64::min);
    let d_opt_min = if d_opt_min.is_finite() { d_opt_min } else { 0.0 };

    Ok(RunSummary {
        method: method.to_string(),
        seed,
        status: status.to_string(),
        final_coverage: last.coverage_percent,
        final_algebraic_connectivity: last.algebraic_connectivity,
        final_average_degree: last.average_degree,
        final_tree_connectivity: last.tree_connectivity,
        ssim: crate::grid::ssim(belief, truth, ssim_window)?,
        ssim_masked: crate::grid::ssim_masked(belief, truth, ssim_window)?,
        rmse: crate::grid::rmse(belief, truth)?,
        d_opt_max,
        d_opt_min,
        percent_r: percent_reduction(d_opt_max, d_opt_min),
    })
}

/// Format a float with 6 significant digits, `%.6g`-style: fixed
/// notation for exponents in `[-4, 5]`, scientific otherwise, trailing
/// zeros trimmed. Stable under parse-and-reformat.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("{:e} always carries an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 6);

    let body = if (-4..=5).contains(&exp) {
        if exp >= 0 {
            let split = exp as usize + 1;
            let (int_part, frac_part) = digits.split_at(split);
            let frac = frac_part.trim_end_matches('0');
            if frac.is_empty() {
                int_part.to_string()
            } else {
                format!("{int_part}.{frac}")
            }
        } else {
            let frac = format!("{}{}", "0".repeat((-exp - 1) as usize), digits);
            format!("0.{}", frac.trim_end_matches('0'))
        }
    } else {
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        if tail.is_empty() {
            format!("{head}e{exp}")
        } else {
            format!("{head}.{tail}e{exp}")
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn open_writer(path: &Path) -> Result<BufWriter<File>, MapError> {
    Ok(BufWriter::new(File::create(path)?))
}

pub const TRACE_HEADER: &str = "tick,sim_time_m,coverage_percent,map_entropy,algebraic_connectivity,average_degree,tree_connectivity,graph_uncertainty,node_count,edge_count,selected_x,selected_y";

/// Write a per-tick trace as CSV.
pub fn write_trace_csv(trace: &Trace, path: impl AsRef<Path>) -> Result<(), MapError> {
    let mut w = open_writer(path.as_ref())?;
    writeln!(w, "{TRACE_HEADER}")?;
    for r in &trace.records {
        let (sx, sy) = match r.selected_frontier {
            Some(c) => (c.x.to_string(), c.y.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.tick,
            fmt_sig(r.sim_time_m),
            fmt_sig(r.coverage_percent),
            fmt_sig(r.map_entropy),
            fmt_sig(r.algebraic_connectivity),
            fmt_sig(r.average_degree),
            fmt_sig(r.tree_connectivity),
            fmt_sig(r.graph_uncertainty),
            r.node_count,
            r.edge_count,
            sx,
            sy
        )?;
    }
    w.flush()?;
    Ok(())
}

pub const SCORES_HEADER: &str =
    "tick,centroid_x,centroid_y,e_n,k_n,gamma_n,u1,beta,rho,u2,u_tot,distance_m,reachable";

/// Write per-candidate scores (one row per candidate per tick) as CSV.
pub fn write_scores_csv(trace: &Trace, path: impl AsRef<Path>) -> Result<(), MapError> {
    let mut w = open_writer(path.as_ref())?;
    writeln!(w, "{SCORES_HEADER}")?;
    for s in &trace.scores {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.tick,
            s.centroid.x,
            s.centroid.y,
            fmt_sig(s.e_n),
            s.k_n,
            fmt_sig(s.gamma_n),
            fmt_sig(s.u1),
            s.beta,
            fmt_sig(s.rho),
            fmt_sig(s.u2),
            fmt_sig(s.u_tot),
            fmt_sig(s.distance_m),
            s.reachable
        )?;
    }
    w.flush()?;
    Ok(())
}

pub const SUMMARY_HEADER: &str = "method,seed,status,final_coverage,algebraic_connectivity,average_degree,tree_connectivity,ssim,ssim_masked,rmse,d_opt_max,d_opt_min,percent_r";

/// Write one row per run summary as CSV.
pub fn write_summary_csv(summaries: &[RunSummary], path: impl AsRef<Path>) -> Result<(), MapError> {
    let mut w = open_writer(path.as_ref())?;
    writeln!(w, "{SUMMARY_HEADER}")?;
    for s in summaries {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.method,
            s.seed,
            s.status,
            fmt_sig(s.final_coverage),
            fmt_sig(s.final_algebraic_connectivity),
            fmt_sig(s.final_average_degree),
            fmt_sig(s.final_tree_connectivity),
            fmt_sig(s.ssim),
            fmt_sig(s.ssim_masked),
            fmt_sig(s.rmse),
            fmt_sig(s.d_opt_max),
            fmt_sig(s.d_opt_min),
            fmt_sig(s.percent_r)
        )?;
    }
    w.flush()?;
    Ok(())
}
