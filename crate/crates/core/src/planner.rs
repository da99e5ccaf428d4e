//! Study planning: probability grids over (test size, delta) and minimum
//! test-set-size search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classification::{pfc_classification, ClassificationComparison};
use crate::congruence::{CongruenceAssumption, CongruencePresets, PresetQuantile};
use crate::corpus::Task;
use crate::error::{Error, Result};
use crate::kernels::RngStream;
use crate::segmentation::{pfc_segmentation, SdImputationModel, SdSource, SegmentationComparison};

/// Probability band a grid cell falls into, derived from the
/// median-congruence probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Band {
    Red,
    Orange,
    Green,
}

impl Band {
    /// red above 0.10, orange in (0.05, 0.10], green at or below 0.05.
    pub fn classify(probability: f64) -> Band {
        if probability > 0.10 {
            Band::Red
        } else if probability > 0.05 {
            Band::Orange
        } else {
            Band::Green
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Band::Red => "red",
            Band::Orange => "orange",
            Band::Green => "green",
        }
    }
}

/// One grid cell: the three preset-congruence probabilities plus the band of
/// the median one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub n: u64,
    pub delta: f64,
    pub prob_q1: Option<f64>,
    pub prob_median: Option<f64>,
    pub prob_q3: Option<f64>,
    pub band: Option<Band>,
    pub infeasible: bool,
    /// Any of the three congruence presets needed clamping (classification).
    pub clamped: bool,
}

impl GridCell {
    pub fn probability(&self, quantile: PresetQuantile) -> Option<f64> {
        match quantile {
            PresetQuantile::Q1 => self.prob_q1,
            PresetQuantile::Median => self.prob_median,
            PresetQuantile::Q3 => self.prob_q3,
        }
    }
}

/// Probability-of-false-claims lookup grid over test sizes and deltas.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanningGrid {
    pub task: Task,
    pub base_performance: f64,
    pub n_values: Vec<u64>,
    pub delta_values: Vec<f64>,
    /// Row-major: `cells[d * n_values.len() + i]` is `(delta_values[d], n_values[i])`.
    pub cells: Vec<GridCell>,
}

impl PlanningGrid {
    pub fn cell(&self, delta_index: usize, n_index: usize) -> &GridCell {
        &self.cells[delta_index * self.n_values.len() + n_index]
    }
}

fn validate_axes(n_values: &[u64], delta_values: &[f64], base: f64) -> Result<()> {
    if n_values.is_empty() || delta_values.is_empty() {
        return Err(Error::invalid("grid axes must be non-empty"));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("n values must be strictly ascending"));
    }
    if delta_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("delta values must be strictly ascending"));
    }
    if delta_values[0] < 0.0 {
        return Err(Error::invalid("deltas must be >= 0"));
    }
    if base.is_nan() || base <= 0.0 || base >= 1.0 {
        return Err(Error::invalid(format!(
            "base performance must lie in (0, 1), got {base}"
        )));
    }
    Ok(())
}

/// Builds the full grid. Cells are evaluated in parallel; each Monte Carlo
/// cell derives its stream from (seed, cell index, preset), so the grid is
/// identical for any worker count. Cells whose winner metric would exceed 1
/// are flagged infeasible rather than failing the grid.
#[allow(clippy::too_many_arguments)]
pub fn build_grid(
    task: Task,
    n_values: &[u64],
    delta_values: &[f64],
    base_performance: f64,
    presets: &CongruencePresets,
    model: &SdImputationModel,
    k: u64,
    seed: u64,
) -> Result<PlanningGrid> {
    validate_axes(n_values, delta_values, base_performance)?;
    if k < 1 {
        return Err(Error::invalid("draw count k must be >= 1"));
    }

    let coords: Vec<(usize, u64, f64)> = delta_values
        .iter()
        .enumerate()
        .flat_map(|(d, &delta)| {
            n_values
                .iter()
                .enumerate()
                .map(move |(i, &n)| (d * n_values.len() + i, n, delta))
        })
        .collect();

    let cells: Vec<GridCell> = coords
        .par_iter()
        .map(|&(index, n, delta)| evaluate_cell(task, n, delta, base_performance, presets, model, k, seed, index))
        .collect::<Result<_>>()?;

    Ok(PlanningGrid {
        task,
        base_performance,
        n_values: n_values.to_vec(),
        delta_values: delta_values.to_vec(),
        cells,
    })
}

#[allow(clippy::too_many_arguments)]
fn evaluate_cell(
    task: Task,
    n: u64,
    delta: f64,
    base: f64,
    presets: &CongruencePresets,
    model: &SdImputationModel,
    k: u64,
    seed: u64,
    cell_index: usize,
) -> Result<GridCell> {
    let winner = base + delta;
    let min_n = match task {
        Task::Classification => 1,
        Task::Segmentation => 2,
    };
    if winner > 1.0 || n < min_n {
        return Ok(GridCell {
            n,
            delta,
            prob_q1: None,
            prob_median: None,
            prob_q3: None,
            band: None,
            infeasible: true,
            clamped: false,
        });
    }

    let mut probs = [0.0; 3];
    let mut clamped = false;
    for (slot, quantile) in PresetQuantile::ALL.iter().enumerate() {
        let assumed = presets.get(*quantile);
        let est = match task {
            Task::Classification => {
                let cmp = ClassificationComparison::new(n, winner, base)?;
                let used = cmp.clamp_congruence(assumed);
                clamped |= used.clamped;
                let stream = RngStream::new(seed, 0)
                    .substream(cell_index as u64)
                    .substream(slot as u64);
                pfc_classification(&cmp, used, k, stream)?
            }
            Task::Segmentation => {
                let cmp = SegmentationComparison::new(n, winner, base, None, None)?;
                pfc_segmentation(&cmp, assumed, SdSource::ImputedPoint, model)?
            }
        };
        probs[slot] = est.probability;
    }

    Ok(GridCell {
        n,
        delta,
        prob_q1: Some(probs[0]),
        prob_median: Some(probs[1]),
        prob_q3: Some(probs[2]),
        band: Some(Band::classify(probs[1])),
        infeasible: false,
        clamped,
    })
}

/// Outcome of the minimum-test-set-size search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum RequiredN {
    Found { n: u64 },
    ExceedsCap { cap: u64 },
}

pub const DEFAULT_N_CAP: u64 = 10_000_000;

/// Smallest test-set size whose probability of false claims is at or below
/// `target_pfc`, for a fixed delta, base performance, and congruence.
///
/// The probability is monotone nonincreasing in n, so a doubling bracket
/// followed by bisection finds the boundary. Monte Carlo evaluations raise
/// the draw count until 3 standard errors are below a tenth of the target,
/// and each probe size has a fixed stream, so the search is deterministic.
#[allow(clippy::too_many_arguments)]
pub fn required_n(
    task: Task,
    delta: f64,
    base_performance: f64,
    congruence: CongruenceAssumption,
    target_pfc: f64,
    k: u64,
    seed: u64,
    cap: u64,
    model: &SdImputationModel,
) -> Result<RequiredN> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::invalid("required-n search needs delta > 0"));
    }
    if target_pfc.is_nan() || target_pfc <= 0.0 || target_pfc >= 0.5 {
        return Err(Error::invalid(format!(
            "target probability must lie in (0, 0.5), got {target_pfc}"
        )));
    }
    if base_performance.is_nan() || base_performance <= 0.0 || base_performance + delta > 1.0 {
        return Err(Error::invalid(format!(
            "base {base_performance} + delta {delta} must keep the winner metric within (0, 1]"
        )));
    }
    if cap < 2 {
        return Err(Error::invalid("cap must be >= 2"));
    }

    // Worst-case (p = 0.5) binomial error: 3 * 0.5 / sqrt(k) < target / 10.
    let k_floor = (225.0 / (target_pfc * target_pfc)).ceil() as u64;
    let k_eff = k.max(k_floor);

    let eval = |n: u64| -> Result<f64> {
        match task {
            Task::Classification => {
                let cmp = ClassificationComparison::new(n, base_performance + delta, base_performance)?;
                let used = cmp.clamp_congruence(congruence);
                Ok(pfc_classification(&cmp, used, k_eff, RngStream::new(seed, n))?.probability)
            }
            Task::Segmentation => {
                let cmp =
                    SegmentationComparison::new(n, base_performance + delta, base_performance, None, None)?;
                Ok(pfc_segmentation(&cmp, congruence, SdSource::ImputedPoint, model)?.probability)
            }
        }
    };

    let min_n = match task {
        Task::Classification => 1,
        Task::Segmentation => 2,
    };
    if eval(min_n)? <= target_pfc {
        return Ok(RequiredN::Found { n: min_n });
    }

    // Double until the target is met or the cap is exceeded.
    let mut lo = min_n; // pfc(lo) > target
    let mut hi = min_n;
    loop {
        hi = (hi * 2).min(cap);
        if eval(hi)? <= target_pfc {
            break;
        }
        if hi == cap {
            return Ok(RequiredN::ExceedsCap { cap });
        }
        lo = hi;
    }

    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eval(mid)? <= target_pfc {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RequiredN::Found { n: hi })
}

/// Long-format CSV of the grid: one row per (cell, preset).
pub fn grid_to_csv(grid: &PlanningGrid) -> String {
    let mut out = String::from("n,delta,preset,probability,band\n");
    for cell in &grid.cells {
        for quantile in PresetQuantile::ALL {
            let prob = cell
                .probability(quantile)
                .map(|p| p.to_string())
                .unwrap_or_default();
            let band = if cell.infeasible {
                "infeasible".to_string()
            } else {
                cell.band.map(|b| b.label().to_string()).unwrap_or_default()
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                cell.n,
                cell.delta,
                quantile.label(),
                prob,
                band
            ));
        }
    }
    out
}

const CELL_W: f64 = 116.0;
const CELL_H: f64 = 54.0;
const MARGIN_LEFT: f64 = 86.0;
const MARGIN_TOP: f64 = 46.0;

fn band_color(band: Option<Band>, infeasible: bool) -> &'static str {
    if infeasible {
        return "#bdbdbd";
    }
    match band {
        Some(Band::Red) => "#e05c5c",
        Some(Band::Orange) => "#f2a541",
        Some(Band::Green) => "#67b26f",
        None => "#bdbdbd",
    }
}

/// Standalone SVG heatmap of the grid. Each cell prints the median
/// probability with the (q1, q3) pair underneath and is colored by band.
/// The run configuration is embedded in the `<desc>` element.
pub fn grid_to_svg(grid: &PlanningGrid, config_json: &str) -> String {
    let cols = grid.n_values.len();
    let rows = grid.delta_values.len();
    let width = MARGIN_LEFT + CELL_W * cols as f64 + 20.0;
    let height = MARGIN_TOP + CELL_H * rows as f64 + 56.0;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         font-family=\"monospace\" font-size=\"11\">\n"
    ));
    svg.push_str(&format!("<desc>{}</desc>\n", xml_escape(config_json)));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"18\" font-size=\"13\">probability of false claims: {} (base {})</text>\n",
        MARGIN_LEFT,
        grid.task.label(),
        grid.base_performance
    ));

    // Deltas are drawn largest at the top.
    for (r, &delta) in grid.delta_values.iter().rev().enumerate() {
        let y = MARGIN_TOP + r as f64 * CELL_H;
        svg.push_str(&format!(
            "<text x=\"8\" y=\"{:.1}\">d={}</text>\n",
            y + CELL_H / 2.0 + 4.0,
            delta
        ));
        let d_index = rows - 1 - r;
        for (c, _) in grid.n_values.iter().enumerate() {
            let cell = grid.cell(d_index, c);
            let x = MARGIN_LEFT + c as f64 * CELL_W;
            svg.push_str(&format!(
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{CELL_W:.1}\" height=\"{CELL_H:.1}\" \
                 fill=\"{}\" stroke=\"#ffffff\"/>\n",
                band_color(cell.band, cell.infeasible)
            ));
            if cell.infeasible {
                svg.push_str(&format!(
                    "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">n/a</text>\n",
                    x + CELL_W / 2.0,
                    y + CELL_H / 2.0 + 4.0
                ));
            } else {
                let median = cell.prob_median.unwrap_or(f64::NAN);
                let q1 = cell.prob_q1.unwrap_or(f64::NAN);
                let q3 = cell.prob_q3.unwrap_or(f64::NAN);
                svg.push_str(&format!(
                    "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-weight=\"bold\">{}</text>\n",
                    x + CELL_W / 2.0,
                    y + CELL_H / 2.0 - 3.0,
                    xml_escape(&format_prob(median))
                ));
                svg.push_str(&format!(
                    "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"9\">({}, {})</text>\n",
                    x + CELL_W / 2.0,
                    y + CELL_H / 2.0 + 12.0,
                    xml_escape(&format_prob(q1)),
                    xml_escape(&format_prob(q3))
                ));
            }
        }
    }

    let axis_y = MARGIN_TOP + rows as f64 * CELL_H + 18.0;
    for (c, &n) in grid.n_values.iter().enumerate() {
        let x = MARGIN_LEFT + c as f64 * CELL_W + CELL_W / 2.0;
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{axis_y:.1}\" text-anchor=\"middle\">n={n}</text>\n"
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{:.1}\">bands: red &gt; 0.10, orange (0.05, 0.10], green &lt;= 0.05; \
         cells show median (q1, q3)</text>\n",
        MARGIN_LEFT,
        axis_y + 24.0
    ));
    svg.push_str("</svg>\n");
    svg
}

fn format_prob(p: f64) -> String {
    if p.is_nan() {
        return "-".to_string();
    }
    if p != 0.0 && p < 0.001 {
        "<0.001".to_string()
    } else {
        format!("{p:.3}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
