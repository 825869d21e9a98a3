//! Graph documents, front CSV and transcript files.

use std::fs;
use std::io::{self, Write};
use std::path::{Path as FsPath, PathBuf};

use pgipro_core::graph::{GraphDocument, GraphError, MultiObjectiveGraph, Path};
use pgipro_core::ipro::Solution;
use pgipro_core::session::InteractionEvent;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("malformed graph document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn parse_graph(text: &str) -> Result<MultiObjectiveGraph, ParseError> {
    let doc: GraphDocument = serde_json::from_str(text)?;
    Ok(MultiObjectiveGraph::from_document(doc)?)
}

pub fn load_graph(path: impl AsRef<FsPath>) -> Result<MultiObjectiveGraph, ParseError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ParseError::Read { path: path.to_path_buf(), source })?;
    parse_graph(&text)
}

pub fn graph_to_json(graph: &MultiObjectiveGraph) -> String {
    serde_json::to_string_pretty(&graph.to_document()).expect("graph documents serialize")
}

/// Writes `obj_0,...,obj_{m-1},path` rows, the path as `|`-joined node ids.
pub fn write_front_csv<W: Write>(
    out: W,
    graph: &MultiObjectiveGraph,
    front: &[Solution<Path>],
) -> Result<(), csv::Error> {
    let m = graph.objective_count();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..m).map(|i| format!("obj_{i}")).collect();
    header.push("path".into());
    w.write_record(&header)?;
    for sol in front {
        let mut row: Vec<String> = sol.value.iter().map(|x| x.to_string()).collect();
        row.push(sol.payload.node_ids(graph).join("|"));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn transcript_json(events: &[InteractionEvent]) -> String {
    serde_json::to_string_pretty(events).expect("events serialize")
}

/// Appends one JSON line to `path`, creating the file if needed.
pub fn append_json_line<T: serde::Serialize>(path: &FsPath, record: &T) -> io::Result<()> {
    let line = serde_json::to_string(record).map_err(io::Error::other)?;
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")
}
