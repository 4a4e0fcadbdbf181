//! Deterministic SVG output for odor maps and dendrograms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::clustering::Dendrogram;
use crate::data::{read_csv_rows, ItemSet};
use crate::embedding::EmbeddingResult;
use crate::error::{Error, Result};

pub const DEFAULT_COLOR: &str = "#9e9e9e";

/// Light blue, yellow and red for alcohols, carboxylic acids and aromatics.
pub const FUNCTIONAL_GROUP_COLORS: [(&str, &str); 3] = [
    ("alcohol", "#7ec8e3"),
    ("carboxylic acid", "#f2c500"),
    ("aromatic", "#d62728"),
];

/// Purple, green and red for floral, citrus and woody scents.
pub const SCENT_FAMILY_COLORS: [(&str, &str); 3] = [
    ("floral", "#8e44ad"),
    ("citrus", "#2ca02c"),
    ("woody", "#d62728"),
];

const FALLBACK_PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Label → group and group → color assignments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupSpec {
    groups: BTreeMap<String, String>,
    colors: BTreeMap<String, String>,
}

impl GroupSpec {
    pub fn new() -> Self {
        GroupSpec::default()
    }

    pub fn assign(&mut self, label: impl Into<String>, group: impl Into<String>) -> &mut Self {
        self.groups.insert(label.into().trim().to_string(), group.into());
        self
    }

    pub fn set_color(&mut self, group: impl Into<String>, color: impl Into<String>) -> &mut Self {
        self.colors.insert(group.into(), color.into());
        self
    }

    /// Floral (rose, jasmine, ylang-ylang), citrus (lemon, sweet orange,
    /// grapefruit) and woody (sandalwood, patchouli, cedarwood) oils.
    pub fn scent_families() -> Self {
        let mut spec = GroupSpec::new();
        let members = [
            ("floral", ["rose", "jasmine", "ylang-ylang"]),
            ("citrus", ["lemon", "sweet orange", "grapefruit"]),
            ("woody", ["sandalwood", "patchouli", "cedarwood"]),
        ];
        for (group, labels) in members {
            for label in labels {
                spec.assign(label, group);
            }
        }
        for (group, color) in SCENT_FAMILY_COLORS {
            spec.set_color(group, color);
        }
        spec
    }

    /// Reads a `label,group,color` CSV. Blank colors fall back to the
    /// built-in palettes.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let rows = read_csv_rows(path)?;
        let mut spec = GroupSpec::new();
        for (r, row) in rows.iter().enumerate() {
            if r == 0 && row.first().is_some_and(|c| c.eq_ignore_ascii_case("label")) {
                continue;
            }
            match row.as_slice() {
                [label, group] => {
                    spec.assign(label.as_str(), group.as_str());
                }
                [label, group, color, ..] => {
                    spec.assign(label.as_str(), group.as_str());
                    if !color.is_empty() {
                        if !is_hex_color(color) {
                            return Err(Error::format(
                                path,
                                format!("row {}: {color:?} is not a #rrggbb color", r + 1),
                            ));
                        }
                        spec.set_color(group.as_str(), color.as_str());
                    }
                }
                _ => {
                    return Err(Error::format(path, format!("row {}: expected label,group,color", r + 1)))
                }
            }
        }
        Ok(spec)
    }

    pub fn group_of(&self, label: &str) -> Option<&str> {
        self.groups.get(label).map(String::as_str)
    }

    /// Groups in sorted order.
    pub fn group_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.groups.values().map(String::as_str).collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    pub fn color_of_group(&self, group: &str) -> String {
        if let Some(c) = self.colors.get(group) {
            return c.clone();
        }
        if let Some((_, c)) = SCENT_FAMILY_COLORS
            .iter()
            .chain(FUNCTIONAL_GROUP_COLORS.iter())
            .find(|(g, _)| *g == group)
        {
            return c.to_string();
        }
        let index = self.group_names().iter().position(|g| *g == group).unwrap_or(0);
        FALLBACK_PALETTE[index % FALLBACK_PALETTE.len()].to_string()
    }

    pub fn color_of(&self, label: &str) -> String {
        self.group_of(label)
            .map(|g| self.color_of_group(g))
            .unwrap_or_else(|| DEFAULT_COLOR.to_string())
    }

    /// Every grouped label must be one of `items`.
    pub fn check_labels(&self, items: &ItemSet) -> Result<()> {
        match self.groups.keys().find(|l| items.position(l).is_none()) {
            Some(label) => Err(Error::UnknownGroupLabel(label.clone())),
            None => Ok(()),
        }
    }
}

fn is_hex_color(s: &str) -> bool {
    s.len() == 7 && s.starts_with('#') && s[1..].chars().all(|c| c.is_ascii_hexdigit())
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const MAP_WIDTH: f64 = 800.0;
const MAP_HEIGHT: f64 = 640.0;
const MAP_PAD: f64 = 40.0;
const LEGEND_WIDTH: f64 = 140.0;

/// Scatter-plot SVG of 2-D coordinates, one labelled point per item.
///
/// The axes span the data extent plus 5% on each side. Labels sit to the
/// upper right of their point without collision avoidance.
pub fn render_map_svg(items: &ItemSet, coords: &Array2<f64>, groups: &GroupSpec) -> Result<String> {
    if coords.ncols() != 2 {
        return Err(Error::Config(format!(
            "odor maps need 2-D coordinates, got {}",
            coords.ncols()
        )));
    }
    if coords.nrows() != items.len() {
        return Err(Error::InvalidMatrix(format!(
            "{} coordinate rows for {} items",
            coords.nrows(),
            items.len()
        )));
    }
    groups.check_labels(items)?;

    let axis_range = |col: usize| {
        let values = coords.column(col);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        (lo - 0.05 * span, hi + 0.05 * span)
    };
    let (x_lo, x_hi) = axis_range(0);
    let (y_lo, y_hi) = axis_range(1);
    let plot_w = MAP_WIDTH - 2.0 * MAP_PAD - LEGEND_WIDTH;
    let plot_h = MAP_HEIGHT - 2.0 * MAP_PAD;
    let sx = |x: f64| MAP_PAD + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| MAP_PAD + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{MAP_WIDTH}" height="{MAP_HEIGHT}" viewBox="0 0 {MAP_WIDTH} {MAP_HEIGHT}" font-family="sans-serif">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r##"<rect class="frame" x="{MAP_PAD}" y="{MAP_PAD}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444" stroke-width="1"/>"##
    )
    .unwrap();
    writeln!(
        svg,
        r#"<g class="axis-title" font-size="12"><text x="{:.2}" y="{:.2}" text-anchor="middle">MDS 1</text><text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">MDS 2</text></g>"#,
        MAP_PAD + plot_w / 2.0,
        MAP_HEIGHT - 10.0,
        MAP_PAD + plot_h / 2.0,
        MAP_PAD + plot_h / 2.0
    )
    .unwrap();

    writeln!(svg, r#"<g class="points" font-size="10">"#).unwrap();
    for (i, label) in items.iter().enumerate() {
        let (x, y) = (sx(coords[[i, 0]]), sy(coords[[i, 1]]));
        let color = groups.color_of(label);
        let group = groups.group_of(label).unwrap_or("");
        writeln!(
            svg,
            r##"<g class="item" data-group="{}"><circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}"/><text x="{:.2}" y="{:.2}" fill="#222">{}</text></g>"##,
            escape(group),
            x + 5.0,
            y - 5.0,
            escape(label)
        )
        .unwrap();
    }
    writeln!(svg, "</g>").unwrap();

    let names = groups.group_names();
    if !names.is_empty() {
        let lx = MAP_WIDTH - LEGEND_WIDTH - MAP_PAD / 2.0 + 10.0;
        writeln!(svg, r#"<g class="legend" font-size="11">"#).unwrap();
        for (k, name) in names.iter().enumerate() {
            let ly = MAP_PAD + 10.0 + 18.0 * k as f64;
            writeln!(
                svg,
                r#"<rect x="{lx:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text class="legend-label" x="{:.2}" y="{ly:.2}">{}</text>"#,
                ly - 9.0,
                groups.color_of_group(name),
                lx + 16.0,
                escape(name)
            )
            .unwrap();
        }
        writeln!(svg, "</g>").unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the map of a 2-D embedding to `out`.
pub fn render_map(embedding: &EmbeddingResult, groups: &GroupSpec, out: impl AsRef<Path>) -> Result<()> {
    if embedding.n_components != 2 {
        return Err(Error::Config(format!(
            "odor maps need n_components = 2, got {}",
            embedding.n_components
        )));
    }
    let svg = render_map_svg(&embedding.items, &embedding.coords, groups)?;
    write_file(out.as_ref(), &svg)
}

const DENDRO_WIDTH: f64 = 720.0;
const DENDRO_ROW: f64 = 16.0;
const DENDRO_LABEL_WIDTH: f64 = 170.0;
const DENDRO_PAD: f64 = 30.0;

/// Horizontal dendrogram SVG: leaves on the left in traversal order,
/// merge height increasing to the right. Each merge is a bracket group
/// carrying `data-merge` and `data-height` attributes.
pub fn render_dendrogram_svg(dg: &Dendrogram, labels: &ItemSet, groups: &GroupSpec) -> Result<String> {
    dg.validate()?;
    if labels.len() != dg.n_leaves {
        return Err(Error::LabelMismatch(format!(
            "{} labels for a dendrogram with {} leaves",
            labels.len(),
            dg.n_leaves
        )));
    }
    groups.check_labels(labels)?;

    let n = dg.n_leaves;
    let order = dg.leaf_order();
    let max_height = dg
        .merges
        .iter()
        .map(|m| m.distance)
        .fold(0.0f64, f64::max);
    let scale = if max_height > 0.0 { max_height } else { 1.0 };
    let x0 = DENDRO_PAD + DENDRO_LABEL_WIDTH;
    let plot_w = DENDRO_WIDTH - x0 - DENDRO_PAD;
    let height = 2.0 * DENDRO_PAD + DENDRO_ROW * n as f64 + 20.0;
    let hx = |h: f64| x0 + h / scale * plot_w;

    let mut y = vec![0.0; 2 * n - 1];
    for (row, &leaf) in order.iter().enumerate() {
        y[leaf] = DENDRO_PAD + DENDRO_ROW * (row as f64 + 0.5);
    }
    for (i, m) in dg.merges.iter().enumerate() {
        y[n + i] = 0.5 * (y[m.left] + y[m.right]);
    }

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{DENDRO_WIDTH}" height="{height}" viewBox="0 0 {DENDRO_WIDTH} {height}" font-family="sans-serif">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<g class="leaves" font-size="11">"#).unwrap();
    for &leaf in &order {
        let label = labels.get(leaf).expect("leaf within labels");
        writeln!(
            svg,
            r#"<text class="leaf" data-leaf="{leaf}" x="{:.2}" y="{:.2}" text-anchor="end" dominant-baseline="middle" fill="{}">{}</text>"#,
            x0 - 6.0,
            y[leaf],
            groups.color_of(label),
            escape(label)
        )
        .unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, r##"<g class="merges" fill="none" stroke="#333" stroke-width="1">"##).unwrap();
    for (i, m) in dg.merges.iter().enumerate() {
        let x = hx(m.distance);
        writeln!(
            svg,
            r#"<path class="merge" data-merge="{i}" data-height="{}" d="M{:.2},{:.2}H{x:.2}V{:.2}H{:.2}"/>"#,
            m.distance,
            hx(dg.height(m.left)),
            y[m.left],
            y[m.right],
            hx(dg.height(m.right)),
        )
        .unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    let axis_y = DENDRO_PAD + DENDRO_ROW * n as f64 + 8.0;
    writeln!(
        svg,
        r##"<g class="axis" font-size="10"><line x1="{x0:.2}" y1="{axis_y:.2}" x2="{:.2}" y2="{axis_y:.2}" stroke="#444"/><text x="{x0:.2}" y="{:.2}" text-anchor="middle">0</text><text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text></g>"##,
        x0 + plot_w,
        axis_y + 12.0,
        x0 + plot_w,
        axis_y + 12.0,
        format_tick(max_height)
    )
    .unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn format_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn render_dendrogram(
    dg: &Dendrogram,
    labels: &ItemSet,
    groups: &GroupSpec,
    out: impl AsRef<Path>,
) -> Result<()> {
    let svg = render_dendrogram_svg(dg, labels, groups)?;
    write_file(out.as_ref(), &svg)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
