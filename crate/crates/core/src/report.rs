//! CSV output. Every table has a header row; floats are written with six
//! decimals so reruns are byte-identical.

use std::io::{Read, Write};

use crate::evaluation::{band_of, AccuracyTable, SummaryTable, BANDS, SUMMARY_ROWS};
use crate::minilang::{render_inline, NodeId, Program};
use crate::mutation::{NodeScore, Technique, VariantRecord};
use crate::pipeline::{BootstrapRow, ProblemRun};
use crate::profiler::ProfileReport;

pub type CsvResult<T> = Result<T, csv::Error>;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.6}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w)
}

fn technique_header(first: &str) -> Vec<String> {
    std::iter::once(first.to_string()).chain(Technique::ALL.iter().map(|t| t.to_string())).collect()
}

/// `node_id,kind,count,score`: inherited statement count and its share
/// of the total.
pub fn write_profile<W: Write>(w: W, p: &Program, r: &ProfileReport, scores: &[NodeScore]) -> CsvResult<()> {
    let mut out = writer(w);
    out.write_record(["node_id", "kind", "count", "score"])?;
    for n in p.nodes() {
        let i = n.id.index();
        out.write_record([
            i.to_string(),
            n.kind.name().to_string(),
            r.node_scores[i].to_string(),
            fmt_f64(scores[i].value),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_nodes<W: Write>(w: W, p: &Program, scores: &[NodeScore]) -> CsvResult<()> {
    let mut out = writer(w);
    out.write_record(["node_id", "kind", "source", "value", "n_reduced", "n_compiled", "gap_filled"])?;
    for s in scores {
        out.write_record([
            s.node.index().to_string(),
            p.kind(s.node).name().to_string(),
            render_inline(&p.subtree(s.node)),
            fmt_f64(s.value),
            s.n_reduced.to_string(),
            s.n_compiled.to_string(),
            s.gap_filled.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn nodes_csv(p: &Program, scores: &[NodeScore]) -> String {
    let mut buf = Vec::new();
    write_nodes(&mut buf, p, scores).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8")
}

/// `target,donor,class,cost,correctness`; cost and correctness are empty
/// for variants that did not compile.
pub fn write_variants<W: Write>(w: W, records: &[VariantRecord]) -> CsvResult<()> {
    let mut out = writer(w);
    out.write_record(["target", "donor", "class", "cost", "correctness"])?;
    for r in records {
        out.write_record([
            r.target.index().to_string(),
            r.donor.clone(),
            r.class.to_string(),
            r.cost.map(|c| c.to_string()).unwrap_or_default(),
            r.correctness.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn bad(row: usize, what: &str) -> csv::Error {
    csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, format!("variants row {row}: bad {what}")))
}

pub fn read_variants<R: Read>(r: R) -> CsvResult<Vec<VariantRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        let field = |k: usize| row.get(k).unwrap_or("");
        let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
        out.push(VariantRecord {
            target: NodeId(field(0).parse().map_err(|_| bad(i, "target"))?),
            donor: field(1).to_string(),
            class: field(2).parse().map_err(|_| bad(i, "class"))?,
            cost: opt(field(3)).map(|s| s.parse().map_err(|_| bad(i, "cost"))).transpose()?,
            correctness: opt(field(4)).map(|s| s.parse().map_err(|_| bad(i, "correctness"))).transpose()?,
        });
    }
    Ok(out)
}

pub fn write_accuracy<W: Write>(w: W, t: &AccuracyTable) -> CsvResult<()> {
    let mut out = writer(w);
    out.write_record(technique_header("accuracy"))?;
    for (b, label) in BANDS.iter().enumerate() {
        let row = std::iter::once(label.to_string())
            .chain(Technique::ALL.iter().map(|tech| t.counts.get(tech).map_or(0, |c| c[b]).to_string()));
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(w: W, s: &SummaryTable) -> CsvResult<()> {
    let mut out = writer(w);
    out.write_record(technique_header("row"))?;
    for (i, label) in SUMMARY_ROWS.iter().enumerate() {
        let label = match i {
            0 => format!("{label} (out of {})", s.total_nodes),
            4 => format!("{label} (out of {})", s.total_problems),
            _ => label.to_string(),
        };
        out.write_record(std::iter::once(label).chain(Technique::ALL.iter().map(|&t| s.get(i, t).to_string())))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_bootstrap<W: Write>(w: W, rows: &[BootstrapRow]) -> CsvResult<()> {
    let mut out = writer(w);
    out.write_record(["a", "b", "mean_diff", "ci_low", "ci_high", "resamples", "sample_size", "seed"])?;
    for r in rows {
        let b = &r.result;
        out.write_record([
            r.a.to_string(),
            r.b.to_string(),
            fmt_f64(b.mean_diff),
            fmt_f64(b.ci_low),
            fmt_f64(b.ci_high),
            b.resamples.to_string(),
            b.sample_size.to_string(),
            b.seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_cost<W: Write>(w: W, problems: &[ProblemRun]) -> CsvResult<()> {
    let mut out = writer(w);
    out.write_record([
        "problem",
        "technique",
        "statements",
        "variants_generated",
        "compiled",
        "executed",
        "evaluations",
    ])?;
    for p in problems {
        for t in &p.techniques {
            out.write_record([
                p.summary.name.clone(),
                t.technique.to_string(),
                p.summary.statements.to_string(),
                t.cost.variants_generated.to_string(),
                t.cost.compiled.to_string(),
                t.cost.executed.to_string(),
                t.cost.evaluations.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_rank_errors<W: Write>(w: W, problems: &[ProblemRun]) -> CsvResult<()> {
    let mut out = writer(w);
    out.write_record([
        "problem",
        "technique",
        "node_id",
        "r_i",
        "r_l",
        "n_total",
        "error",
        "accuracy_pct",
        "upper_half",
        "band",
    ])?;
    for p in problems {
        for t in &p.techniques {
            let e = &t.errors;
            for n in &e.per_node {
                out.write_record([
                    e.problem.clone(),
                    t.technique.to_string(),
                    n.node.index().to_string(),
                    fmt_f64(n.r_i),
                    fmt_f64(n.r_l),
                    e.n_total.to_string(),
                    fmt_f64(n.error),
                    fmt_f64(n.accuracy_pct(e.n_total)),
                    n.upper_half.to_string(),
                    BANDS[band_of(n, e.n_total)].to_string(),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// One row per improved version: measured reduction next to the
/// reference figure.
pub fn write_corpus<W: Write>(w: W, problems: &[crate::corpus::ProblemSummary]) -> CsvResult<()> {
    let mut out = writer(w);
    out.write_record([
        "problem",
        "nodes",
        "statements",
        "improvement_nodes",
        "original_cost",
        "improved",
        "improved_cost",
        "correctness",
        "reduction_pct",
        "reference_pct",
    ])?;
    for p in problems {
        for i in &p.improved {
            out.write_record([
                p.name.clone(),
                p.nodes.to_string(),
                p.statements.to_string(),
                p.improvement_nodes.len().to_string(),
                p.original_cost.to_string(),
                format!("improved-{}", i.k),
                i.cost.to_string(),
                fmt_f64(i.correctness),
                fmt_f64(i.reduction_pct),
                fmt_f64(p.reference_pct),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}
