//! Tab-separated dataset and graph files.
//!
//! Both formats start with `#nodes <N> #dim <d>`. Dataset rows are
//! `id<TAB>label<TAB>c1,c2,…` and graph vector rows are `id<TAB>c1,c2,…`,
//! followed in graph files by `source<TAB>target<TAB>weight<TAB>kind` edge
//! rows. Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{validate_dataset, EmbeddingVector, ItemId};
use crate::graph::{Edge, EdgeKind, LabeledVector, SemanticGraph};

fn header(n: usize, dim: usize) -> String {
    format!("#nodes {n} #dim {dim}\n")
}

fn parse_header(line: Option<&str>) -> Result<(usize, usize)> {
    let line = line.ok_or_else(|| Error::parse(1, "missing header"))?;
    let parts: Vec<&str> = line.split_whitespace().collect();
    match parts.as_slice() {
        ["#nodes", n, "#dim", d] => {
            let n = n.parse().map_err(|_| Error::parse(1, format!("bad node count {n:?}")))?;
            let d = d.parse().map_err(|_| Error::parse(1, format!("bad dimension {d:?}")))?;
            Ok((n, d))
        }
        _ => Err(Error::parse(1, format!("expected `#nodes <N> #dim <d>`, got {line:?}"))),
    }
}

fn write_coords(out: &mut String, values: &[f64]) {
    for (i, x) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{x}").expect("write to string");
    }
}

fn parse_id(s: &str, line: usize) -> Result<ItemId> {
    s.parse::<u64>()
        .map(ItemId)
        .map_err(|_| Error::parse(line, format!("bad item id {s:?}")))
}

fn parse_coords(s: &str, dim: usize, line: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = s
        .split(',')
        .map(|c| c.parse::<f64>().map_err(|_| Error::parse(line, format!("bad coordinate {c:?}"))))
        .collect::<Result<_>>()?;
    if values.len() != dim {
        return Err(Error::parse(line, format!("expected {dim} coordinates, found {}", values.len())));
    }
    Ok(values)
}

pub fn format_dataset(data: &[LabeledVector]) -> String {
    let dim = data.first().map_or(0, |d| d.vector.dim());
    let mut out = header(data.len(), dim);
    for d in data {
        write!(out, "{}\t{}\t", d.vector.id, d.label).expect("write to string");
        write_coords(&mut out, &d.vector.values);
        out.push('\n');
    }
    out
}

pub fn parse_dataset(text: &str) -> Result<Vec<LabeledVector>> {
    let mut lines = text.lines();
    let (n, dim) = parse_header(lines.next())?;
    let mut out = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, label, coords] = fields.as_slice() else {
            return Err(Error::parse(lineno, "expected id, label and coordinates"));
        };
        let label = label
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad cluster label {label:?}")))?;
        let vector = EmbeddingVector {
            id: parse_id(id, lineno)?,
            values: parse_coords(coords, dim, lineno)?,
        };
        out.push(LabeledVector { vector, label });
    }
    if out.len() != n {
        return Err(Error::parse(1, format!("header declares {n} nodes, found {}", out.len())));
    }
    let vectors: Vec<EmbeddingVector> = out.iter().map(|d| d.vector.clone()).collect();
    validate_dataset(&vectors)?;
    Ok(out)
}

pub fn format_graph(graph: &SemanticGraph) -> String {
    let dim = graph.nodes().first().map_or(0, |v| v.dim());
    let mut out = header(graph.len(), dim);
    for v in graph.nodes() {
        write!(out, "{}\t", v.id).expect("write to string");
        write_coords(&mut out, &v.values);
        out.push('\n');
    }
    for e in graph.edges() {
        writeln!(out, "{}\t{}\t{}\t{}", e.source, e.target, e.weight, e.kind).expect("write to string");
    }
    out
}

pub fn parse_graph(text: &str) -> Result<SemanticGraph> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.is_empty());
    let (n, dim) = parse_header(lines.next().map(|(_, l)| l))?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (i, line) = lines
            .next()
            .ok_or_else(|| Error::parse(1, format!("header declares {n} nodes, found {}", nodes.len())))?;
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, coords] = fields.as_slice() else {
            return Err(Error::parse(i + 1, "expected id and coordinates"));
        };
        nodes.push(EmbeddingVector {
            id: parse_id(id, i + 1)?,
            values: parse_coords(coords, dim, i + 1)?,
        });
    }
    let mut graph = SemanticGraph::new(nodes)?;
    for (i, line) in lines {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        let [s, t, w, kind] = fields.as_slice() else {
            return Err(Error::parse(lineno, "expected source, target, weight and kind"));
        };
        let edge = Edge {
            source: parse_id(s, lineno)?,
            target: parse_id(t, lineno)?,
            weight: w.parse().map_err(|_| Error::parse(lineno, format!("bad weight {w:?}")))?,
            kind: kind.parse::<EdgeKind>().map_err(|m| Error::parse(lineno, m))?,
        };
        match graph.insert_edge(edge) {
            Ok(true) => {}
            Ok(false) => return Err(Error::parse(lineno, "duplicate edge")),
            Err(e) => return Err(Error::parse(lineno, e.to_string())),
        }
    }
    Ok(graph)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Vec<LabeledVector>> {
    parse_dataset(&read_text(path)?)
}

pub fn write_dataset(path: &Path, data: &[LabeledVector]) -> Result<()> {
    write_text(path, &format_dataset(data))
}

pub fn read_graph(path: &Path) -> Result<SemanticGraph> {
    parse_graph(&read_text(path)?)
}

pub fn write_graph(path: &Path, graph: &SemanticGraph) -> Result<()> {
    write_text(path, &format_graph(graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{add_symbolic_edges_sparse, build_labeled_knn_graph, elect_cluster_heads};
    use crate::synthetic::{generate_clusters, SyntheticDatasetSpec};

    #[test]
    fn dataset_round_trip() {
        let d = generate_clusters(&SyntheticDatasetSpec::default()).unwrap();
        let text = format_dataset(&d);
        assert!(text.starts_with("#nodes 200 #dim 2\n"));
        assert!(!text.contains('\r'));
        assert_eq!(parse_dataset(&text).unwrap(), d);
    }

    #[test]
    fn dataset_errors() {
        assert!(parse_dataset("").is_err());
        assert!(parse_dataset("#nodes 1 #dim 2\n0\t0\t1.0\n").is_err());
        assert!(parse_dataset("#nodes 2 #dim 1\n0\t0\t1.0\n").is_err());
        assert!(matches!(
            parse_dataset("#nodes 2 #dim 1\n0\t0\t1.0\n0\t1\t2.0\n"),
            Err(Error::DuplicateId(ItemId(0)))
        ));
        assert!(parse_dataset("#nodes 1 #dim 1\nx\t0\t1.0\n").is_err());
    }

    #[test]
    fn graph_round_trip() {
        let d = generate_clusters(&SyntheticDatasetSpec { num_points: 40, ..Default::default() }).unwrap();
        let heads = elect_cluster_heads(&d).unwrap();
        let g = add_symbolic_edges_sparse(build_labeled_knn_graph(&d, 3).unwrap(), &heads, 2).unwrap();
        let text = format_graph(&g);
        let back = parse_graph(&text).unwrap();
        assert_eq!(back.nodes(), g.nodes());
        assert_eq!(back.edges(), g.edges());
        assert_eq!(format_graph(&back), text);
    }

    #[test]
    fn graph_errors() {
        let base = "#nodes 2 #dim 1\n0\t1\n1\t2\n";
        assert!(parse_graph(base).is_ok());
        assert!(parse_graph(&format!("{base}0\t1\t0.5\tweird\n")).is_err());
        assert!(parse_graph(&format!("{base}0\t0\t0.5\tknn\n")).is_err());
        assert!(parse_graph(&format!("{base}0\t7\t0.5\tknn\n")).is_err());
        assert!(parse_graph(&format!("{base}0\t1\t0.5\tknn\n0\t1\t0.5\tknn\n")).is_err());
        assert!(parse_graph("#nodes 3 #dim 1\n0\t1\n").is_err());
    }
}
