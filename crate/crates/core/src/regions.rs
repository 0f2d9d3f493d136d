//! Triangular-lattice geometry: region builders, weight schemes, dents,
//! tileability predicates, hook tilings and forced-lozenge reduction.
//!
//! Coordinates: rows are numbered from 1 at the top. A cell's `h` is the
//! horizontal position of its left vertex in half-units, so an up triangle
//! `(r, h)` has its base on `[h, h + 2]` at the bottom of row `r`, and a down
//! triangle `(r, d)` has its top edge on `[d, d + 2]`. The up triangle `(r, h)`
//! touches the down triangles `(r, h - 1)` (left lozenge), `(r, h + 1)` (right
//! lozenge) and `(r + 1, h)` (vertical lozenge).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{rat, LaurentPoly};
use crate::qformulas::{sym_weight, xy_weight, BaseDents, Quartered, SpecError, TwoSided};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegionError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("cell {0} is not in the region")]
    Absent(Cell),
    #[error("cell {0} is already in the region")]
    Present(Cell),
    #[error("row {0} has no down triangles to anchor a dent")]
    EmptyRow(i64),
    #[error("region is not tileable: {0}")]
    Untileable(String),
    #[error("region is not mirror symmetric")]
    Asymmetric,
    #[error("operation not supported for this weight scheme: {0}")]
    Unsupported(String),
    #[error("{0} is not a lozenge")]
    NotALozenge(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Orient {
    Up,
    Down,
}

/// A unit triangle. The derived order is row-major, which every engine relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: i64,
    pub h: i64,
    pub orient: Orient,
}

impl Cell {
    pub fn up(row: i64, h: i64) -> Self {
        Cell { row, h, orient: Orient::Up }
    }

    pub fn down(row: i64, h: i64) -> Self {
        Cell { row, h, orient: Orient::Down }
    }

    pub fn is_up(&self) -> bool {
        self.orient == Orient::Up
    }

    /// The three edge-neighbours together with the kind of lozenge they would form.
    pub fn neighbours(&self) -> [(Cell, LozengeKind); 3] {
        let (r, h) = (self.row, self.h);
        match self.orient {
            Orient::Up => [
                (Cell::down(r, h - 1), LozengeKind::Left),
                (Cell::down(r, h + 1), LozengeKind::Right),
                (Cell::down(r + 1, h), LozengeKind::Vertical),
            ],
            Orient::Down => [
                (Cell::up(r, h + 1), LozengeKind::Left),
                (Cell::up(r, h - 1), LozengeKind::Right),
                (Cell::up(r - 1, h), LozengeKind::Vertical),
            ],
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = if self.is_up() { "UP" } else { "DOWN" };
        write!(f, "{o}({},{})", self.row, self.h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LozengeKind {
    Left,
    Vertical,
    Right,
}

/// A lozenge is stored by its up triangle and its kind; the down triangle follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lozenge {
    pub up: Cell,
    pub kind: LozengeKind,
}

impl Lozenge {
    pub fn new(up: Cell, kind: LozengeKind) -> Self {
        Lozenge { up, kind }
    }

    /// The lozenge covering an up and a down cell, if they share an edge.
    pub fn from_pair(up: Cell, down: Cell) -> Result<Self, RegionError> {
        up.neighbours()
            .iter()
            .find(|(d, _)| *d == down)
            .map(|&(_, kind)| Lozenge { up, kind })
            .ok_or_else(|| RegionError::NotALozenge(format!("{up} + {down}")))
    }

    pub fn down(&self) -> Cell {
        let (r, h) = (self.up.row, self.up.h);
        match self.kind {
            LozengeKind::Left => Cell::down(r, h - 1),
            LozengeKind::Right => Cell::down(r, h + 1),
            LozengeKind::Vertical => Cell::down(r + 1, h),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    S,
    Sprime,
    Q,
    Qprime,
    Sbase,
    SprimeBase,
    P,
    Pprime,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::S,
        Family::Sprime,
        Family::Q,
        Family::Qprime,
        Family::Sbase,
        Family::SprimeBase,
        Family::P,
        Family::Pprime,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::S => "S",
            Family::Sprime => "Sprime",
            Family::Q => "Q",
            Family::Qprime => "Qprime",
            Family::Sbase => "Sbase",
            Family::SprimeBase => "SprimeBase",
            Family::P => "P",
            Family::Pprime => "Pprime",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AxisRule {
    Normal,
    /// Labelled lozenges with label 0 get weight 1/2.
    Half,
}

/// Which lozenge orientation carries the non-trivial weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Weighted {
    Vertical,
    Right,
    Left,
}

/// Concrete weight assignment of one region.
///
/// A lozenge of the weighted orientation whose up triangle is `(r, h)` gets
/// label `i = h + 1 - axis_h` for vertical lozenges and
/// `k = floor((h + r) / 2) + slope * r - axis_h` for the two diagonal ones.
/// The weight is `(X q^i + Y q^-i) / 2`, or `(q^i + q^-i) / 2` when `xy` is off.
/// All other lozenges weigh 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightScheme {
    pub variant: Family,
    pub weighted: Weighted,
    pub axis_h: i64,
    #[serde(default)]
    pub slope: i64,
    pub on_axis_rule: AxisRule,
    pub xy: bool,
}

impl WeightScheme {
    pub fn label(&self, up: Cell) -> i64 {
        match self.weighted {
            Weighted::Vertical => up.h + 1 - self.axis_h,
            Weighted::Right | Weighted::Left => (up.h + up.row).div_euclid(2) + self.slope * up.row - self.axis_h,
        }
    }

    pub fn weighs(&self, kind: LozengeKind) -> bool {
        matches!(
            (self.weighted, kind),
            (Weighted::Vertical, LozengeKind::Vertical)
                | (Weighted::Right, LozengeKind::Right)
                | (Weighted::Left, LozengeKind::Left)
        )
    }

    pub fn weight(&self, loz: &Lozenge) -> LaurentPoly {
        if !self.weighs(loz.kind) {
            return LaurentPoly::one();
        }
        let k = self.label(loz.up);
        if k == 0 && self.on_axis_rule == AxisRule::Half {
            return LaurentPoly::constant(rat(1, 2));
        }
        if self.xy {
            xy_weight(k)
        } else {
            sym_weight(k)
        }
    }

    /// The scheme seen in a mirror image whose columns map `h -> c2 - h`.
    /// Only vertical schemes have a mirror in the same family of schemes.
    fn mirrored(&self, c2: i64) -> Result<WeightScheme, RegionError> {
        if self.weighted != Weighted::Vertical {
            return Err(RegionError::Unsupported("reflection of a diagonally weighted scheme".into()));
        }
        Ok(WeightScheme { axis_h: c2 - self.axis_h, ..self.clone() })
    }
}

/// Affine recipe for a scheme: `axis_h = constant + per_x * x + per_rows * rows`.
///
/// This is the unit stored in the calibration table, because the axis of a
/// family moves with the region's parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeTemplate {
    pub weighted: Weighted,
    pub constant: i64,
    #[serde(default)]
    pub per_x: i64,
    #[serde(default)]
    pub per_rows: i64,
    #[serde(default)]
    pub slope: i64,
    pub on_axis_rule: AxisRule,
    pub xy: bool,
}

impl SchemeTemplate {
    pub fn vertical(constant: i64, per_x: i64, per_rows: i64, rule: AxisRule, xy: bool) -> Self {
        SchemeTemplate { weighted: Weighted::Vertical, constant, per_x, per_rows, slope: 0, on_axis_rule: rule, xy }
    }

    pub fn instantiate(&self, variant: Family, x: i64, rows: i64) -> WeightScheme {
        WeightScheme {
            variant,
            weighted: self.weighted,
            axis_h: self.constant + self.per_x * x + self.per_rows * rows,
            slope: self.slope,
            on_axis_rule: self.on_axis_rule,
            xy: self.xy,
        }
    }

    pub fn describe(&self) -> String {
        let mut axis = self.constant.to_string();
        for (c, v) in [(self.per_x, "x"), (self.per_rows, "rows")] {
            if c != 0 {
                axis = format!(
                    "{axis} {} {}{v}",
                    if c < 0 { '-' } else { '+' },
                    if c.abs() == 1 { String::new() } else { c.abs().to_string() }
                );
            }
        }
        let w = match self.weighted {
            Weighted::Vertical => "vertical".to_string(),
            Weighted::Right => format!("right, slope {}", self.slope),
            Weighted::Left => format!("left, slope {}", self.slope),
        };
        let rule = if self.on_axis_rule == AxisRule::Half { ", half on axis" } else { "" };
        format!("{w} lozenges, axis {axis}{rule}")
    }
}

/// Status of one calibrated family in the shipped table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationStatus {
    Calibrated,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub status: CalibrationStatus,
    pub scheme: SchemeTemplate,
    #[serde(default)]
    pub note: String,
}

/// The weight schemes of the figure-dependent families, loaded from a versioned JSON file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub version: u32,
    #[serde(rename = "Sprime")]
    pub sprime: CalibrationEntry,
    #[serde(rename = "SprimeBase")]
    pub sprime_base: CalibrationEntry,
    #[serde(rename = "Qprime")]
    pub qprime: CalibrationEntry,
}

const BUILTIN_CALIBRATION: &str = include_str!("../config/calibration.json");

impl CalibrationTable {
    pub fn builtin() -> CalibrationTable {
        serde_json::from_str(BUILTIN_CALIBRATION).expect("shipped calibration table is valid JSON")
    }

    pub fn from_json(text: &str) -> Result<CalibrationTable, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialises") + "\n"
    }
}

/// Construction parameters, kept for reporting.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub a: Vec<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub b: Vec<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub s: Vec<i64>,
}

/// A weighted region: a finite set of unit triangles plus the scheme weighting its lozenges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub family: Family,
    pub params: Params,
    pub cells: BTreeSet<Cell>,
    pub scheme: WeightScheme,
}

impl Region {
    pub fn new(family: Family, params: Params, cells: BTreeSet<Cell>, scheme: WeightScheme) -> Self {
        Region { family, params, cells, scheme }
    }

    pub fn contains(&self, c: &Cell) -> bool {
        self.cells.contains(c)
    }

    pub fn ups(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.is_up())
    }

    pub fn downs(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.is_up())
    }

    pub fn up_count(&self) -> usize {
        self.ups().count()
    }

    pub fn down_count(&self) -> usize {
        self.downs().count()
    }

    pub fn is_balanced(&self) -> bool {
        self.up_count() == self.down_count()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn weight(&self, loz: &Lozenge) -> LaurentPoly {
        self.scheme.weight(loz)
    }

    /// Lozenges available inside the region, keyed by up triangle.
    pub fn lozenges_at(&self, up: Cell) -> Vec<Lozenge> {
        up.neighbours()
            .iter()
            .filter(|(d, _)| self.cells.contains(d))
            .map(|&(_, kind)| Lozenge::new(up, kind))
            .collect()
    }

    /// Up triangles of one row, ordered left to right.
    pub fn row_ups(&self, row: i64) -> Vec<Cell> {
        self.ups().filter(|c| c.row == row).copied().collect()
    }

    pub fn row_downs(&self, row: i64) -> Vec<Cell> {
        self.downs().filter(|c| c.row == row).copied().collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("regions serialise")
    }

    /// Checks that `tiling` covers every cell exactly once with lozenges of this region.
    pub fn validates(&self, tiling: &[Lozenge]) -> bool {
        let mut seen = BTreeSet::new();
        for l in tiling {
            let d = l.down();
            if !self.cells.contains(&l.up) || !self.cells.contains(&d) || !seen.insert(l.up) || !seen.insert(d) {
                return false;
            }
        }
        seen.len() == self.cells.len()
    }

    /// Product of the lozenge weights of a tiling.
    pub fn tiling_weight(&self, tiling: &[Lozenge]) -> LaurentPoly {
        tiling.iter().map(|l| self.weight(l)).product()
    }

    /// One-line-per-row picture: `^` for up triangles, `v` for down ones, `.` for holes.
    pub fn render_ascii(&self) -> String {
        if self.cells.is_empty() {
            return "(empty region)\n".into();
        }
        let lo = self.cells.iter().map(|c| c.h).min().unwrap_or(0);
        let hi = self.cells.iter().map(|c| c.h).max().unwrap_or(0);
        let rows: BTreeSet<i64> = self.cells.iter().map(|c| c.row).collect();
        let mut out = String::new();
        for r in rows {
            let in_row: Vec<i64> = self.cells.iter().filter(|c| c.row == r).map(|c| c.h).collect();
            let (first, last) = (in_row[0], in_row[in_row.len() - 1]);
            let line: String = (lo..=hi)
                .map(|h| {
                    if self.cells.contains(&Cell::up(r, h)) {
                        '^'
                    } else if self.cells.contains(&Cell::down(r, h)) {
                        'v'
                    } else if h > first && h < last {
                        '.'
                    } else {
                        ' '
                    }
                })
                .collect();
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

/// Rows `1..=rows` of a trapezoid of top width `x`: ups at `-r, -r+2, .., 2x+r-2`.
fn trapezoid(x: i64, rows: i64) -> BTreeSet<Cell> {
    let mut cells = BTreeSet::new();
    for r in 1..=rows {
        cells.extend((0..x + r).map(|j| Cell::up(r, -r + 2 * j)));
        cells.extend((0..x + r - 1).map(|j| Cell::down(r, -(r - 1) + 2 * j)));
    }
    cells
}

/// Rows `1..=rows` of a quartered hexagon: odd rows start with an up triangle at `-1`,
/// even rows with a down triangle at `-1`; every row ends with an up triangle at `2x + r - 2`.
fn quartered(x: i64, rows: i64) -> BTreeSet<Cell> {
    let mut cells = BTreeSet::new();
    for r in 1..=rows {
        let (up0, down0) = if r % 2 == 1 { (-1, 0) } else { (0, -1) };
        cells.extend((up0..=2 * x + r - 2).step_by(2).map(|h| Cell::up(r, h)));
        cells.extend((down0..=2 * x + r - 3).step_by(2).map(|h| Cell::down(r, h)));
    }
    cells
}

fn s_template() -> SchemeTemplate {
    SchemeTemplate::vertical(0, 1, 0, AxisRule::Normal, true)
}

fn q_template() -> SchemeTemplate {
    SchemeTemplate::vertical(-1, 0, 0, AxisRule::Normal, false)
}

fn s_base_template() -> SchemeTemplate {
    SchemeTemplate::vertical(1, 0, -1, AxisRule::Normal, true)
}

/// Remove the leftmost up triangle of each row in `left` and the rightmost of each row in `right`.
fn cut_dents(cells: &mut BTreeSet<Cell>, left: &[i64], right: &[i64]) {
    for (rows, leftmost) in [(left, true), (right, false)] {
        for &r in rows {
            let row: Vec<Cell> = cells.iter().filter(|c| c.row == r && c.is_up()).copied().collect();
            let pick = if leftmost { row.first() } else { row.last() };
            if let Some(c) = pick {
                cells.remove(c);
            }
        }
    }
}

fn two_sided(family: Family, x: i64, spec: &TwoSided, template: &SchemeTemplate) -> Result<Region, RegionError> {
    if x < 0 {
        return Err(SpecError::Precondition("x must be non-negative".into()).into());
    }
    let spec = TwoSided::new(spec.a.clone(), spec.b.clone())?;
    let mut cells = trapezoid(x, spec.rows());
    cut_dents(&mut cells, &spec.a, &spec.b);
    let params = Params { x: Some(x), a: spec.a.clone(), b: spec.b.clone(), ..Params::default() };
    Ok(Region::new(family, params, cells, template.instantiate(family, x, spec.rows())))
}

/// Semi-hexagon `S_x(a; b)` with vertical lozenges weighted around the base midpoint.
pub fn build_s(x: i64, spec: &TwoSided) -> Result<Region, RegionError> {
    two_sided(Family::S, x, spec, &s_template())
}

/// `S'_x(a; b)` under the scheme stored in `table`.
pub fn build_sprime_with(x: i64, spec: &TwoSided, table: &CalibrationTable) -> Result<Region, RegionError> {
    two_sided(Family::Sprime, x, spec, &table.sprime.scheme)
}

pub fn build_sprime(x: i64, spec: &TwoSided) -> Result<Region, RegionError> {
    build_sprime_with(x, spec, &CalibrationTable::builtin())
}

/// `S'_x(a; b)` under an explicit candidate scheme, used by calibration.
pub fn build_sprime_template(x: i64, spec: &TwoSided, template: &SchemeTemplate) -> Result<Region, RegionError> {
    two_sided(Family::Sprime, x, spec, template)
}

fn quartered_region(
    family: Family,
    x: i64,
    spec: &Quartered,
    template: &SchemeTemplate,
) -> Result<Region, RegionError> {
    if x < 0 {
        return Err(SpecError::Precondition("x must be non-negative".into()).into());
    }
    let spec = Quartered::new(spec.a.clone())?;
    let rows = 2 * spec.m();
    let mut cells = quartered(x, rows);
    cut_dents(&mut cells, &[], &spec.a);
    let params = Params { x: Some(x), a: spec.a.clone(), ..Params::default() };
    Ok(Region::new(family, params, cells, template.instantiate(family, x, rows)))
}

/// Quartered hexagon `Q_x(a)`.
pub fn build_q(x: i64, spec: &Quartered) -> Result<Region, RegionError> {
    quartered_region(Family::Q, x, spec, &q_template())
}

pub fn build_qprime_with(x: i64, spec: &Quartered, table: &CalibrationTable) -> Result<Region, RegionError> {
    quartered_region(Family::Qprime, x, spec, &table.qprime.scheme)
}

/// `Q'_x(a)`: the same shape as `Q_x(a)` with the axis shifted so some lozenges sit on it.
pub fn build_qprime(x: i64, spec: &Quartered) -> Result<Region, RegionError> {
    build_qprime_with(x, spec, &CalibrationTable::builtin())
}

pub fn build_qprime_template(x: i64, spec: &Quartered, template: &SchemeTemplate) -> Result<Region, RegionError> {
    quartered_region(Family::Qprime, x, spec, template)
}

fn base_region(family: Family, spec: &BaseDents, template: &SchemeTemplate) -> Result<Region, RegionError> {
    let spec = BaseDents::new(spec.a, spec.b, spec.s.clone())?;
    let mut cells = trapezoid(spec.a, spec.b);
    let base = (spec.b > 0).then(|| cells.iter().filter(|c| c.row == spec.b && c.is_up()).copied().collect::<Vec<_>>());
    if let Some(base) = base {
        for &p in &spec.s {
            cells.remove(&base[(p - 1) as usize]);
        }
    }
    let params = Params { x: Some(spec.a), n: Some(spec.b), s: spec.s.clone(), ..Params::default() };
    Ok(Region::new(family, params, cells, template.instantiate(family, spec.a, spec.b)))
}

/// Trapezoid with `b` up triangles removed from its base.
pub fn build_s_base(spec: &BaseDents) -> Result<Region, RegionError> {
    base_region(Family::Sbase, spec, &s_base_template())
}

pub fn build_sprime_base_with(spec: &BaseDents, table: &CalibrationTable) -> Result<Region, RegionError> {
    base_region(Family::SprimeBase, spec, &table.sprime_base.scheme)
}

pub fn build_sprime_base(spec: &BaseDents) -> Result<Region, RegionError> {
    build_sprime_base_with(spec, &CalibrationTable::builtin())
}

pub fn build_sprime_base_template(spec: &BaseDents, template: &SchemeTemplate) -> Result<Region, RegionError> {
    base_region(Family::SprimeBase, spec, template)
}

fn halved_region(family: Family, x: i64, n: i64, template: &SchemeTemplate) -> Result<Region, RegionError> {
    if x < 0 || n < 0 {
        return Err(SpecError::Precondition("x and n must be non-negative".into()).into());
    }
    let mut cells = quartered(x, 2 * n);
    let bottom: Vec<Cell> = cells.iter().filter(|c| c.row == 2 * n && c.is_up()).copied().collect();
    for c in bottom.iter().rev().take(n as usize) {
        cells.remove(c);
    }
    let params = Params { x: Some(x), n: Some(n), ..Params::default() };
    Ok(Region::new(family, params, cells, template.instantiate(family, x, 2 * n)))
}

/// Halved hexagon `P_{x,n}`: a quartered hexagon with `2n` rows whose bottom row lost its `n` rightmost up triangles.
pub fn build_p(x: i64, n: i64) -> Result<Region, RegionError> {
    halved_region(Family::P, x, n, &q_template())
}

pub fn build_pprime_with(x: i64, n: i64, table: &CalibrationTable) -> Result<Region, RegionError> {
    halved_region(Family::Pprime, x, n, &table.qprime.scheme)
}

pub fn build_pprime(x: i64, n: i64) -> Result<Region, RegionError> {
    build_pprime_with(x, n, &CalibrationTable::builtin())
}

pub fn build_pprime_template(x: i64, n: i64, template: &SchemeTemplate) -> Result<Region, RegionError> {
    halved_region(Family::Pprime, x, n, template)
}

/// Dent counting criterion for two-sided semi-hexagons: no initial segment of rows
/// `1..=t` may hold more than `t` dents.
pub fn tileable_s(spec: &TwoSided) -> bool {
    (1..=spec.rows()).all(|t| {
        let c = spec.a.iter().chain(&spec.b).filter(|&&v| v <= t).count() as i64;
        c <= t
    })
}

/// Criterion for quartered hexagons: rows `1..=2t` hold at most `t` dents.
pub fn tileable_q(spec: &Quartered) -> bool {
    (1..=spec.m()).all(|t| spec.a.iter().filter(|&&v| v <= 2 * t).count() as i64 <= t)
}

/// Builds a tiling out of lozenge paths, one hook per dent.
///
/// Sources are up triangles with no down triangle on their left, sinks are
/// down triangles with no up triangle on their right. The `k`-th source from the
/// top is joined to the `k`-th sink by a hook: vertical lozenges down to the
/// sink's row, then right lozenges along it. Every other up triangle takes a
/// left lozenge.
pub fn canonical_tiling(region: &Region) -> Result<Vec<Lozenge>, RegionError> {
    let has = |c: Cell| region.cells.contains(&c);
    let sources: Vec<Cell> = region.ups().filter(|u| !has(Cell::down(u.row, u.h - 1))).copied().collect();
    let mut sinks: Vec<Cell> = region.downs().filter(|d| !has(Cell::up(d.row, d.h + 1))).copied().collect();
    sinks.sort_by_key(|d| (d.row, -d.h));
    if sources.len() != sinks.len() {
        return Err(RegionError::Untileable(format!("{} path starts but {} path ends", sources.len(), sinks.len())));
    }
    let mut tiling = Vec::new();
    let fail = |why: String| RegionError::Untileable(why);
    for (src, sink) in sources.iter().zip(&sinks) {
        if sink.row < src.row {
            return Err(fail(format!("path from {src} cannot reach {sink}")));
        }
        let mut up = *src;
        let mut at_end = false;
        while up.row < sink.row {
            let loz = Lozenge::new(up, LozengeKind::Vertical);
            tiling.push(loz);
            let d = loz.down();
            if d == *sink {
                at_end = true;
                break;
            }
            up = Cell::up(d.row, d.h + 1);
        }
        if !at_end {
            loop {
                let loz = Lozenge::new(up, LozengeKind::Right);
                tiling.push(loz);
                let d = loz.down();
                if d == *sink {
                    break;
                }
                if d.h > sink.h {
                    return Err(fail(format!("path from {src} overshoots {sink}")));
                }
                up = Cell::up(d.row, d.h + 1);
            }
        }
    }
    let on_path: BTreeSet<Cell> = tiling.iter().map(|l| l.up).collect();
    for u in region.ups() {
        if !on_path.contains(u) {
            tiling.push(Lozenge::new(*u, LozengeKind::Left));
        }
    }
    tiling.sort();
    if region.validates(&tiling) {
        Ok(tiling)
    } else {
        Err(fail("hook paths collide".into()))
    }
}

/// Repeatedly removes lozenges forced by cells with a single remaining neighbour.
///
/// Returns the reduced region and the product of the removed weights. If a cell
/// ends up with no neighbour the reduction stops there and the caller's
/// generating function of the remainder is 0.
pub fn reduce_forced(region: &Region) -> (Region, LaurentPoly) {
    let mut cells = region.cells.clone();
    let mut factor = LaurentPoly::one();
    loop {
        let mut forced = None;
        for c in &cells {
            let nb: Vec<_> = c.neighbours().into_iter().filter(|(d, _)| cells.contains(d)).collect();
            match nb.len() {
                0 => return (Region { cells, ..region.clone() }, factor),
                1 => {
                    let (other, _) = nb[0];
                    let (up, down) = if c.is_up() { (*c, other) } else { (other, *c) };
                    forced = Some(Lozenge::from_pair(up, down).expect("neighbours form a lozenge"));
                    break;
                }
                _ => {}
            }
        }
        let Some(l) = forced else { break };
        factor = &factor * &region.weight(&l);
        cells.remove(&l.up);
        cells.remove(&l.down());
    }
    (Region { cells, ..region.clone() }, factor)
}

pub fn delete_triangles(region: &Region, positions: &[Cell]) -> Result<Region, RegionError> {
    let mut out = region.clone();
    for c in positions {
        if !out.cells.remove(c) {
            return Err(RegionError::Absent(*c));
        }
    }
    Ok(out)
}

/// Adds cells back. Used to undo a deletion.
pub fn insert_triangles(region: &Region, positions: &[Cell]) -> Result<Region, RegionError> {
    let mut out = region.clone();
    for c in positions {
        if !out.cells.insert(*c) {
            return Err(RegionError::Present(*c));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// The up triangle that a dent on `side` of `row` removed, computed from the row's down triangles.
pub fn dent_cell(region: &Region, side: Side, row: i64) -> Result<Cell, RegionError> {
    let downs = region.row_downs(row);
    let (first, last) = match (downs.first(), downs.last()) {
        (Some(f), Some(l)) => (f.h, l.h),
        _ => return Err(RegionError::EmptyRow(row)),
    };
    Ok(match side {
        Side::Left => Cell::up(row, first - 1),
        Side::Right => Cell::up(row, last + 1),
    })
}

/// Fills the dent on `side` of `row` with an up triangle.
pub fn fill_dent(region: &Region, side: Side, row: i64) -> Result<Region, RegionError> {
    let c = dent_cell(region, side, row)?;
    insert_triangles(region, &[c])
}

/// Column sum `c2` of the reflection `h -> c2 - h - 2` that maps the region's hull onto itself.
pub fn mirror_sum(region: &Region) -> i64 {
    let lo = region.cells.iter().map(|c| c.h).min().unwrap_or(0);
    let hi = region.cells.iter().map(|c| c.h).max().unwrap_or(0);
    lo + hi + 2
}

pub fn mirror_cell(c: Cell, c2: i64) -> Cell {
    Cell { h: c2 - c.h - 2, ..c }
}

/// Left-right mirror image. Labels change sign, so the weights of the image are
/// the original weights with `X` and `Y` exchanged.
pub fn reflect(region: &Region) -> Result<Region, RegionError> {
    let c2 = mirror_sum(region);
    let cells = region.cells.iter().map(|&c| mirror_cell(c, c2)).collect();
    // Vertical lozenge centres sit at h + 1, so the axis maps like a centre.
    let scheme = region.scheme.mirrored(c2)?;
    Ok(Region { cells, scheme, ..region.clone() })
}

pub fn is_mirror_symmetric(region: &Region) -> bool {
    let c2 = mirror_sum(region);
    region.cells.iter().all(|&c| region.cells.contains(&mirror_cell(c, c2)))
}

/// Cells of the region grouped by row, mostly for diagnostics.
pub fn rows(region: &Region) -> BTreeMap<i64, Vec<Cell>> {
    let mut out: BTreeMap<i64, Vec<Cell>> = BTreeMap::new();
    for c in &region.cells {
        out.entry(c.row).or_default().push(*c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(a: &[i64], b: &[i64]) -> TwoSided {
        TwoSided::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn s_construction_counts() {
        let r = build_s(1, &ts(&[1], &[2])).unwrap();
        assert_eq!((r.up_count(), r.down_count()), (3, 3));
        for x in 0..3 {
            let full = build_s(x, &ts(&[], &[])).unwrap();
            assert!(full.is_empty());
            let r = build_s(x, &ts(&[1, 3], &[2])).unwrap();
            assert!(r.is_balanced());
        }
    }

    #[test]
    fn undented_excess_equals_dent_count() {
        for x in 0..3 {
            for rows in 1..5 {
                let t = trapezoid(x, rows);
                let ups = t.iter().filter(|c| c.is_up()).count() as i64;
                assert_eq!(ups - (t.len() as i64 - ups), rows);
            }
            for m in 1..4 {
                let t = quartered(x, 2 * m);
                let ups = t.iter().filter(|c| c.is_up()).count() as i64;
                assert_eq!(ups - (t.len() as i64 - ups), m);
            }
        }
    }

    #[test]
    fn predicates() {
        assert!(!tileable_s(&ts(&[1], &[1])));
        assert!(tileable_s(&ts(&[], &[])));
        assert!(tileable_s(&ts(&[2], &[1])));
        assert!(!tileable_q(&Quartered::new(vec![1, 2]).unwrap()));
        assert!(tileable_q(&Quartered::new(vec![4, 5, 6]).unwrap()));
        assert!(tileable_q(&Quartered::new(vec![1]).unwrap()));
    }

    #[test]
    fn q_with_first_dent_is_forced_away() {
        for x in 0..4 {
            let r = build_q(x, &Quartered::new(vec![1]).unwrap()).unwrap();
            let (rest, f) = reduce_forced(&r);
            assert!(rest.is_empty(), "x = {x}");
            assert!(f.is_one());
        }
    }

    #[test]
    fn hook_tiling_without_right_dents_is_all_left() {
        let r = build_s(2, &ts(&[1, 2, 3], &[])).unwrap();
        let t = canonical_tiling(&r).unwrap();
        assert!(t.iter().all(|l| l.kind == LozengeKind::Left));
        let r = build_s(1, &ts(&[1, 3], &[2, 4])).unwrap();
        assert!(r.validates(&canonical_tiling(&r).unwrap()));
    }

    #[test]
    fn fill_and_delete_round_trip() {
        let r = build_s(1, &ts(&[2], &[1])).unwrap();
        let filled = fill_dent(&r, Side::Left, 2).unwrap();
        let c = dent_cell(&r, Side::Left, 2).unwrap();
        assert_eq!(delete_triangles(&filled, &[c]).unwrap(), r);
        assert!(delete_triangles(&r, &[Cell::up(9, 9)]).is_err());
    }

    #[test]
    fn symmetric_s_reflects_onto_itself() {
        let r = build_s(2, &ts(&[2, 3], &[2, 3])).unwrap();
        assert!(is_mirror_symmetric(&r));
        let m = reflect(&r).unwrap();
        assert_eq!(m.cells, r.cells);
        assert_eq!(m.scheme.axis_h, r.scheme.axis_h);
    }

    #[test]
    fn lozenge_from_pair() {
        let u = Cell::up(2, 0);
        assert_eq!(Lozenge::from_pair(u, Cell::down(3, 0)).unwrap().kind, LozengeKind::Vertical);
        assert_eq!(Lozenge::from_pair(u, Cell::down(2, 1)).unwrap().kind, LozengeKind::Right);
        assert!(Lozenge::from_pair(u, Cell::down(2, 3)).is_err());
    }

    #[test]
    fn builtin_table_parses() {
        let t = CalibrationTable::builtin();
        assert_eq!(t.version, 1);
        assert_eq!(CalibrationTable::from_json(&t.to_json()).unwrap(), t);
    }
}
