//! Token-level HTML heatmaps.
//!
//! Each token becomes an inline span whose background is red for positive
//! scores and blue for negative ones, with opacity equal to the score's
//! magnitude after normalizing by the largest magnitude in the instance.
//!
//! ```
//! use thermostat::render::normalize;
//!
//! assert_eq!(normalize(&[2.0, -4.0]), vec![0.5, -1.0]);
//! assert_eq!(normalize(&[0.0, 0.0]), vec![0.0, 0.0]);
//! ```

use std::fmt::Write;

use html_escape::encode_text;

use crate::hub::{CoordinateId, Instance};
use crate::model::Vocab;

/// A renderable instance: one display string and one normalized score per
/// position.
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub tokens: Vec<String>,
    /// In `[-1, 1]`; the largest magnitude is 1 unless all are 0.
    pub scores: Vec<f64>,
    pub title: String,
}

/// Divides every score by the largest absolute score. All-zero input stays
/// all zero.
pub fn normalize(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if max == 0.0 {
        return vec![0.0; scores.len()];
    }
    scores.iter().map(|s| s / max).collect()
}

impl Heatmap {
    /// Ids missing from `vocab` are shown as `[UNK:<id>]`.
    pub fn from_instance(
        inst: &Instance,
        vocab: &Vocab,
        label_names: &[String],
        coordinate: &CoordinateId,
    ) -> Self {
        let label = |i: usize| {
            label_names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("class_{i}"))
        };
        let tokens = inst
            .input_ids
            .ids()
            .iter()
            .map(|&id| match vocab.token(id) {
                Some(t) => t.to_owned(),
                None => format!("[UNK:{id}]"),
            })
            .collect();
        Self {
            tokens,
            scores: normalize(&inst.attributions),
            title: format!(
                "{} #{} | true: {} | predicted: {}",
                coordinate.canonical(),
                inst.idx,
                label(inst.true_label),
                label(inst.predicted_label())
            ),
        }
    }

    /// The heatmap as a `<div>` fragment, for embedding several in one page.
    pub fn to_fragment(&self) -> String {
        let mut out = String::new();
        writeln!(out, "<div class=\"heatmap\">").unwrap();
        writeln!(out, "<h2>{}</h2>", encode_text(&self.title)).unwrap();
        out.push_str("<p>");
        for (i, (token, &score)) in self.tokens.iter().zip(&self.scores).enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let (r, b) = if score < 0.0 { (0, 255) } else { (255, 0) };
            write!(
                out,
                "<span style=\"background-color: rgba({r},0,{b},{:.3})\" title=\"{score:.3}\">{}</span>",
                score.abs(),
                encode_text(token)
            )
            .unwrap();
        }
        out.push_str("</p>\n</div>\n");
        out
    }

    /// A standalone HTML5 document containing only this heatmap.
    pub fn to_html(&self) -> String {
        page(&self.title, &[self])
    }
}

const STYLE: &str = "body { font-family: sans-serif; margin: 2em; }\n\
    .heatmap { margin-bottom: 2em; }\n\
    .heatmap h2 { font-size: 1em; font-weight: normal; color: #444; }\n\
    .heatmap p { line-height: 2.2; }\n\
    .heatmap span { padding: 0.2em 0.3em; border-radius: 0.3em; }\n";

/// A standalone HTML5 document holding the given heatmaps in order.
pub fn page(title: &str, heatmaps: &[&Heatmap]) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    writeln!(out, "<title>{}</title>", encode_text(title)).unwrap();
    writeln!(out, "<style>\n{STYLE}</style>\n</head>\n<body>").unwrap();
    for h in heatmaps {
        out.push_str(&h.to_fragment());
    }
    out.push_str("</body>\n</html>\n");
    out
}

/// Two heatmaps next to each other in one document, e.g. the same input
/// explained under two models.
pub fn side_by_side(title: &str, left: &Heatmap, right: &Heatmap) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    writeln!(out, "<title>{}</title>", encode_text(title)).unwrap();
    writeln!(
        out,
        "<style>\n{STYLE}.pair {{ display: flex; gap: 2em; }}\n.pair .heatmap {{ flex: 1; }}\n</style>\n</head>\n<body>"
    )
    .unwrap();
    writeln!(out, "<h1>{}</h1>\n<div class=\"pair\">", encode_text(title)).unwrap();
    out.push_str(&left.to_fragment());
    out.push_str(&right.to_fragment());
    out.push_str("</div>\n</body>\n</html>\n");
    out
}

/// Renders one instance as a self-contained HTML document. The output is a
/// pure function of the arguments.
pub fn render_html(
    inst: &Instance,
    vocab: &Vocab,
    label_names: &[String],
    coordinate: &CoordinateId,
) -> String {
    Heatmap::from_instance(inst, vocab, label_names, coordinate).to_html()
}
