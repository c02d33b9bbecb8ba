//! Maps a numeric format to speedup and energy savings relative to the
//! single-precision baseline via a configurable delay/area/energy table.
//!
//! Cost is pluggable data: each table row gives the delay, area, and energy
//! of a MAC unit at some total bit width as a ratio to the 32-bit baseline
//! unit, and queries interpolate piecewise-linearly between rows (clamping
//! outside the tabulated range). Speedup combines the clock-frequency
//! advantage with the extra parallelism bought by the area reduction,
//! `1 / (delay_ratio * area_ratio)`, so narrower units improve throughput
//! quadratically. Energy savings is `1 / energy_ratio`.
//!
//! The default float table is calibrated so that a 14-bit format returns a
//! 7.2x speedup with 3.4x energy savings and a 15-bit format 5.7x and 3.0x,
//! with the split between delay and area chosen as the unique pair of affine
//! functions (in width, each 1.0 at width 32) whose product matches both
//! speedups. The default fixed table is synthetic: delay, area, and energy
//! all proportional to width, normalized at width 32. Users with real
//! synthesis numbers should load their own tables.

use crate::error::{Error, Result};
use crate::numeric::{FormatKind, NumericFormat};
use std::fs;
use std::path::Path;

/// Baseline single-precision MAC width all ratios are normalized against.
pub const BASELINE_BITS: u32 = 32;

/// One row of a cost table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEntry {
    pub total_bits: u32,
    /// Custom unit delay / baseline unit delay.
    pub delay_ratio: f64,
    /// Custom unit area / baseline unit area.
    pub area_ratio: f64,
    /// Custom unit energy / baseline unit energy.
    pub energy_ratio: f64,
}

/// A per-kind cost table with piecewise-linear interpolation over width.
#[derive(Debug, Clone)]
pub struct CostTable {
    kind: FormatKind,
    entries: Vec<CostEntry>,
}

impl CostTable {
    pub fn new(kind: FormatKind, entries: Vec<CostEntry>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::CostTable(format!(
                "need at least two entries, got {}",
                entries.len()
            )));
        }
        for pair in entries.windows(2) {
            if pair[1].total_bits <= pair[0].total_bits {
                return Err(Error::CostTable(format!(
                    "widths must be strictly increasing, got {} then {}",
                    pair[0].total_bits, pair[1].total_bits
                )));
            }
        }
        for e in &entries {
            if e.delay_ratio <= 0.0 || e.area_ratio <= 0.0 || e.energy_ratio <= 0.0 {
                return Err(Error::CostTable(format!(
                    "ratios must be positive at width {}",
                    e.total_bits
                )));
            }
        }
        Ok(Self { kind, entries })
    }

    pub fn kind(&self) -> FormatKind {
        self.kind
    }

    pub fn entries(&self) -> &[CostEntry] {
        &self.entries
    }

    /// Interpolated (delay, area, energy) ratios at a width, clamped to the
    /// tabulated range. Exact row hits return the row values unchanged.
    fn ratios_at(&self, width: u32) -> (f64, f64, f64) {
        let first = self.entries.first().unwrap();
        let last = self.entries.last().unwrap();
        let w = width.clamp(first.total_bits, last.total_bits);
        let upper = match self
            .entries
            .iter()
            .position(|e| e.total_bits >= w)
        {
            Some(i) => i,
            None => unreachable!("clamped width within range"),
        };
        let hi = &self.entries[upper];
        if hi.total_bits == w {
            return (hi.delay_ratio, hi.area_ratio, hi.energy_ratio);
        }
        let lo = &self.entries[upper - 1];
        let t = (w - lo.total_bits) as f64 / (hi.total_bits - lo.total_bits) as f64;
        (
            lo.delay_ratio + t * (hi.delay_ratio - lo.delay_ratio),
            lo.area_ratio + t * (hi.area_ratio - lo.area_ratio),
            lo.energy_ratio + t * (hi.energy_ratio - lo.energy_ratio),
        )
    }

    fn check_kind(&self, fmt: &NumericFormat) -> Result<()> {
        if fmt.kind() != self.kind {
            return Err(Error::CostTable(format!(
                "format {fmt} is {} but the table is {}",
                fmt.kind(),
                self.kind
            )));
        }
        Ok(())
    }

    /// Throughput ratio to the baseline unit: `1 / (delay * area)`.
    /// Baseline is exactly 1.0.
    pub fn speedup(&self, fmt: &NumericFormat) -> Result<f64> {
        self.check_kind(fmt)?;
        if matches!(fmt, NumericFormat::Baseline) {
            return Ok(1.0);
        }
        let (delay, area, _) = self.ratios_at(fmt.total_bits());
        Ok(1.0 / (delay * area))
    }

    /// Baseline energy / custom energy. Baseline is exactly 1.0.
    pub fn energy_savings(&self, fmt: &NumericFormat) -> Result<f64> {
        self.check_kind(fmt)?;
        if matches!(fmt, NumericFormat::Baseline) {
            return Ok(1.0);
        }
        let (_, _, energy) = self.ratios_at(fmt.total_bits());
        Ok(1.0 / energy)
    }
}

/// The float and fixed tables used by a run.
#[derive(Debug, Clone)]
pub struct CostTables {
    pub float: CostTable,
    pub fixed: CostTable,
}

impl CostTables {
    /// Routes a format to the table of its kind.
    pub fn table_for(&self, fmt: &NumericFormat) -> &CostTable {
        match fmt.kind() {
            FormatKind::Float => &self.float,
            FormatKind::Fixed => &self.fixed,
        }
    }

    pub fn speedup(&self, fmt: &NumericFormat) -> f64 {
        self.table_for(fmt).speedup(fmt).expect("kind-routed table")
    }

    pub fn energy_savings(&self, fmt: &NumericFormat) -> f64 {
        self.table_for(fmt)
            .energy_savings(fmt)
            .expect("kind-routed table")
    }

    /// Replaces the table matching `table.kind()`.
    pub fn replace(&mut self, table: CostTable) {
        match table.kind() {
            FormatKind::Float => self.float = table,
            FormatKind::Fixed => self.fixed = table,
        }
    }
}

/// Speedup/energy anchors the default float table reproduces.
const FLOAT_ANCHORS: [(u32, f64, f64); 2] = [(14, 7.2, 3.4), (15, 5.7, 3.0)];

/// The default float and fixed cost tables (see the module docs).
pub fn default_tables() -> CostTables {
    let (delay_slope, area_slope) = solve_float_slopes();
    let affine = |slope: f64, w: u32| 1.0 + slope * (w as f64 - BASELINE_BITS as f64);
    let mut float_entries = Vec::new();
    for (w, _, energy_savings) in FLOAT_ANCHORS {
        float_entries.push(CostEntry {
            total_bits: w,
            delay_ratio: affine(delay_slope, w),
            area_ratio: affine(area_slope, w),
            energy_ratio: 1.0 / energy_savings,
        });
    }
    float_entries.push(CostEntry {
        total_bits: BASELINE_BITS,
        delay_ratio: 1.0,
        area_ratio: 1.0,
        energy_ratio: 1.0,
    });
    let float = CostTable::new(FormatKind::Float, float_entries).expect("calibrated table");

    let proportional = |w: u32| w as f64 / BASELINE_BITS as f64;
    let fixed_entries = [2, BASELINE_BITS, 64]
        .into_iter()
        .map(|w| CostEntry {
            total_bits: w,
            delay_ratio: proportional(w),
            area_ratio: proportional(w),
            energy_ratio: proportional(w),
        })
        .collect();
    let fixed = CostTable::new(FormatKind::Fixed, fixed_entries).expect("synthetic table");

    CostTables { float, fixed }
}

/// Solves for the two affine slopes (delay, area) whose product hits both
/// float anchors: with `u = width - 32`, the product is
/// `1 + (b + d) u + (b d) u^2`, so the anchor speedups give a 2x2 linear
/// system in `s = b + d` and `p = b d`, and the slopes are the roots of
/// `t^2 - s t + p`. The smaller root is delay (logic depth grows slowly with
/// width), the larger is area.
fn solve_float_slopes() -> (f64, f64) {
    let (w1, s1, _) = FLOAT_ANCHORS[0];
    let (w2, s2, _) = FLOAT_ANCHORS[1];
    let u1 = w1 as f64 - BASELINE_BITS as f64;
    let u2 = w2 as f64 - BASELINE_BITS as f64;
    let r1 = 1.0 / s1 - 1.0;
    let r2 = 1.0 / s2 - 1.0;
    let det = u1 * u2 * u2 - u2 * u1 * u1;
    let s = (r1 * u2 * u2 - r2 * u1 * u1) / det;
    let p = (u1 * r2 - u2 * r1) / det;
    let disc = (s * s - 4.0 * p).sqrt();
    ((s - disc) / 2.0, (s + disc) / 2.0)
}

/// Reads a cost table file: blank lines and `#` comments are ignored, the
/// first record must be `kind: float` or `kind: fixed`, and every following
/// record is `width delay_ratio area_ratio energy_ratio` separated by
/// whitespace, sorted by strictly increasing width.
pub fn load_cost_table(path: &Path) -> Result<CostTable> {
    let text = fs::read_to_string(path)?;
    let fail = |reason: String| Error::ParseFile {
        path: path.display().to_string(),
        reason,
    };
    let mut kind = None;
    let mut entries = Vec::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if kind.is_none() {
            let Some(value) = line.strip_prefix("kind:") else {
                return Err(fail(format!("line {}: expected a kind: header", number + 1)));
            };
            kind = Some(match value.trim() {
                "float" => FormatKind::Float,
                "fixed" => FormatKind::Fixed,
                other => return Err(fail(format!("line {}: unknown kind {other:?}", number + 1))),
            });
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(fail(format!(
                "line {}: expected `width delay area energy`, got {} fields",
                number + 1,
                fields.len()
            )));
        }
        let width: u32 = fields[0]
            .parse()
            .map_err(|_| fail(format!("line {}: bad width {:?}", number + 1, fields[0])))?;
        let mut ratios = [0.0; 3];
        for (slot, field) in ratios.iter_mut().zip(&fields[1..]) {
            *slot = field
                .parse()
                .map_err(|_| fail(format!("line {}: bad ratio {field:?}", number + 1)))?;
        }
        entries.push(CostEntry {
            total_bits: width,
            delay_ratio: ratios[0],
            area_ratio: ratios[1],
            energy_ratio: ratios[2],
        });
    }
    let kind = kind.ok_or_else(|| fail("missing kind: header".into()))?;
    CostTable::new(kind, entries).map_err(|e| fail(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fmt(literal: &str) -> NumericFormat {
        literal.parse().unwrap()
    }

    #[test]
    fn default_float_table_reproduces_anchors() {
        let tables = default_tables();
        assert!((tables.speedup(&fmt("float:m7e6")) - 7.2).abs() < 1e-9);
        assert!((tables.energy_savings(&fmt("float:m7e6")) - 3.4).abs() < 1e-9);
        assert!((tables.speedup(&fmt("float:m8e6")) - 5.7).abs() < 1e-9);
        assert!((tables.energy_savings(&fmt("float:m8e6")) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn baseline_is_exactly_one() {
        let tables = default_tables();
        assert_eq!(tables.speedup(&NumericFormat::Baseline), 1.0);
        assert_eq!(tables.energy_savings(&NumericFormat::Baseline), 1.0);
        assert_eq!(tables.speedup(&fmt("float:m23e8")), 1.0);
    }

    #[test]
    fn two_entry_table_example() {
        let table = CostTable::new(
            FormatKind::Float,
            vec![
                CostEntry {
                    total_bits: 8,
                    delay_ratio: 0.5,
                    area_ratio: 0.25,
                    energy_ratio: 0.5,
                },
                CostEntry {
                    total_bits: 32,
                    delay_ratio: 1.0,
                    area_ratio: 1.0,
                    energy_ratio: 1.0,
                },
            ],
        )
        .unwrap();
        // width 8 = float:m1e5 (1 sign + 5 exponent + 1 mantissa + ... ) pick m2e5: 1+5+2=8
        assert_eq!(table.speedup(&fmt("float:m2e5")).unwrap(), 8.0);
        // width 20 interpolates: delay 0.5+0.5*12/24=0.75, area 0.25+0.75*12/24=0.625
        let s = table.speedup(&fmt("float:m13e6")).unwrap();
        assert!((s - 1.0 / (0.75 * 0.625)).abs() < 1e-12);
    }

    #[test]
    fn queries_clamp_to_the_table_range() {
        let tables = default_tables();
        // Narrower than the narrowest float row: clamps to the width-14 row.
        assert!((tables.speedup(&fmt("float:m1e1")) - 7.2).abs() < 1e-9);
        // Wider than the widest row: clamps to baseline.
        assert_eq!(tables.speedup(&fmt("float:m30e11")), 1.0);
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let tables = default_tables();
        assert!(tables.float.speedup(&fmt("fixed:i4f4")).is_err());
        assert!(tables.fixed.speedup(&fmt("float:m4e4")).is_err());
        assert!(tables.fixed.speedup(&NumericFormat::Baseline).is_err());
    }

    #[test]
    fn fixed_table_is_proportional_to_width() {
        let tables = default_tables();
        // width 9: speedup (32/9)^2
        let s = tables.speedup(&fmt("fixed:i4f4"));
        assert!((s - (32.0f64 / 9.0).powi(2)).abs() < 1e-9);
        let e = tables.energy_savings(&fmt("fixed:i4f4"));
        assert!((e - 32.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn speedup_is_nonincreasing_for_nondecreasing_tables() {
        let tables = default_tables();
        let mut last = f64::INFINITY;
        for m in 1..=20 {
            let s = tables.speedup(&fmt(&format!("float:m{m}e6")));
            assert!(s <= last + 1e-12);
            last = s;
        }
        let mut last = f64::INFINITY;
        for i in 1..=16 {
            let s = tables.speedup(&fmt(&format!("fixed:i{i}f4")));
            assert!(s <= last + 1e-12);
            last = s;
        }
    }

    #[test]
    fn table_construction_rejects_bad_inputs() {
        let entry = |w| CostEntry {
            total_bits: w,
            delay_ratio: 0.5,
            area_ratio: 0.5,
            energy_ratio: 0.5,
        };
        assert!(CostTable::new(FormatKind::Float, vec![entry(8)]).is_err());
        assert!(CostTable::new(FormatKind::Float, vec![entry(8), entry(8)]).is_err());
        assert!(CostTable::new(FormatKind::Float, vec![entry(9), entry(8)]).is_err());
        let mut bad = entry(8);
        bad.delay_ratio = 0.0;
        assert!(CostTable::new(FormatKind::Float, vec![bad, entry(32)]).is_err());
    }

    #[test]
    fn cost_table_file_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.cost");
        std::fs::write(
            &path,
            "# synthesized at 28nm\nkind: float\n14 0.7 0.2 0.3\n32 1 1 1\n",
        )
        .unwrap();
        let table = load_cost_table(&path).unwrap();
        assert_eq!(table.kind(), FormatKind::Float);
        assert_eq!(table.entries().len(), 2);
        assert!((table.speedup(&fmt("float:m7e6")).unwrap() - 1.0 / 0.14).abs() < 1e-12);

        for bad in [
            "14 0.7 0.2 0.3\n32 1 1 1\n",          // missing header
            "kind: posit\n14 0.7 0.2 0.3\n",        // unknown kind
            "kind: float\n14 0.7 0.2\n32 1 1 1\n",  // short row
            "kind: float\n32 1 1 1\n14 0.7 0.2 0.3\n", // unsorted
            "kind: float\n14 0.7 0.2 0.3\n14 0.7 0.2 0.3\n", // duplicate
            "kind: float\n14 -0.7 0.2 0.3\n32 1 1 1\n", // nonpositive
        ] {
            std::fs::write(&path, bad).unwrap();
            assert!(load_cost_table(&path).is_err(), "accepted {bad:?}");
        }
    }
}
