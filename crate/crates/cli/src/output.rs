use std::io::{self, Write};

use serde::Serialize;

use crate::args::Format;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub modes_used: Option<usize>,
    pub tail_bound: Option<f64>,
    pub wall_time_ms: f64,
}

/// Everything a subcommand produces, ready for any output format.
pub struct Report<R, Row> {
    pub result: R,
    /// One record per CSV line.
    pub rows: Vec<Row>,
    pub human: String,
    pub diagnostics: Diagnostics,
    pub exit_code: i32,
}

#[derive(Serialize)]
struct Request<'a, A> {
    command: &'a str,
    #[serde(flatten)]
    args: &'a A,
}

#[derive(Serialize)]
struct Envelope<'a, A, R> {
    request: Request<'a, A>,
    result: &'a R,
    diagnostics: Diagnostics,
}

pub fn emit<A, R, Row>(
    out: &mut impl Write,
    command: &str,
    args: &A,
    format: Format,
    report: &Report<R, Row>,
) -> io::Result<()>
where
    A: Serialize,
    R: Serialize,
    Row: Serialize,
{
    match format {
        Format::Json => {
            let envelope = Envelope {
                request: Request { command, args },
                result: &report.result,
                diagnostics: report.diagnostics,
            };
            serde_json::to_writer_pretty(&mut *out, &envelope)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for row in &report.rows {
                w.serialize(row).map_err(io::Error::other)?;
            }
            w.flush()
        }
        Format::Human => out.write_all(report.human.as_bytes()),
    }
}
