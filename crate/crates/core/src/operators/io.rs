use super::{EdgeFunction, VertexFunction};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

fn to_csv(values: &[f64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "value"])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([i.to_string(), format!("{v:?}")])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

fn from_csv(text: &str, len: usize) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut values = vec![None; len];
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| rec.get(i).map(str::trim).ok_or_else(|| Error::Parse("short record".into()));
        let idx: usize = parse(0)?.parse().map_err(|e| Error::Parse(format!("index: {e}")))?;
        let v: f64 = parse(1)?.parse().map_err(|e| Error::Parse(format!("value: {e}")))?;
        let slot = values.get_mut(idx).ok_or(Error::GraphMismatch)?;
        *slot = Some(v);
    }
    values.into_iter().enumerate().map(|(i, v)| v.ok_or_else(|| Error::Parse(format!("missing index {i}")))).collect()
}

/// `index,value` rows in vertex order.
pub fn vertex_function_to_csv(f: &VertexFunction) -> Result<String> {
    to_csv(f.values())
}

pub fn vertex_function_from_csv(g: &WeightedGraph, text: &str) -> Result<VertexFunction> {
    VertexFunction::new(g, from_csv(text, g.vertex_count())?)
}

/// `index,value` rows in canonical directed-edge order.
pub fn edge_function_to_csv(f: &EdgeFunction) -> Result<String> {
    to_csv(f.values())
}

pub fn edge_function_from_csv(g: &WeightedGraph, text: &str) -> Result<EdgeFunction> {
    EdgeFunction::new(g, from_csv(text, g.edge_count())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_grid;

    #[test]
    fn round_trips_exactly() {
        let g = gen_grid(1, 3, 1.0).unwrap();
        let f = VertexFunction::new(&g, vec![0.1, -1.0 / 3.0, 1e-300]).unwrap();
        let text = vertex_function_to_csv(&f).unwrap();
        assert!(text.starts_with("index,value\n0,0.1\n"));
        assert_eq!(vertex_function_from_csv(&g, &text).unwrap(), f);

        let e = EdgeFunction::from_upper(&g, |x, y| (x * 10 + y) as f64 / 7.0);
        let back = edge_function_from_csv(&g, &edge_function_to_csv(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn missing_rows_are_rejected() {
        let g = gen_grid(1, 3, 1.0).unwrap();
        assert!(matches!(vertex_function_from_csv(&g, "index,value\n0,1\n2,1\n"), Err(Error::Parse(_))));
        assert_eq!(vertex_function_from_csv(&g, "index,value\n5,1\n"), Err(Error::GraphMismatch));
    }
}
