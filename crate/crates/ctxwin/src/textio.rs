//! Line-oriented text serialization for windows and proposals.
//!
//! One record per line: `scale_id kind x0 y0 x1 y1 [score] [slice_z]`.
//! Windows use kinds `positive`/`negative` with six fields; proposals use
//! kind `proposal` with all eight. Blank lines and `#` comments are skipped.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{CtxError, Result};
use crate::geom::Rect;
use crate::proposals::Proposal;
use crate::windows::{Window, WindowKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TextRecord {
    Window(Window),
    Proposal(Proposal),
}

pub fn write_records(out: &mut dyn Write, records: &[TextRecord]) -> Result<()> {
    for rec in records {
        match rec {
            TextRecord::Window(w) => {
                let kind = match w.kind {
                    WindowKind::Positive => "positive",
                    WindowKind::Negative => "negative",
                };
                writeln!(
                    out,
                    "{} {} {} {} {} {}",
                    w.scale_id, kind, w.rect.x0, w.rect.y0, w.rect.x1, w.rect.y1
                )?;
            }
            TextRecord::Proposal(p) => {
                writeln!(
                    out,
                    "{} proposal {} {} {} {} {} {}",
                    p.scale_id, p.rect.x0, p.rect.y0, p.rect.x1, p.rect.y1, p.score, p.slice_z
                )?;
            }
        }
    }
    Ok(())
}

pub fn read_records(input: &mut dyn Read) -> Result<Vec<TextRecord>> {
    let reader = BufReader::new(input);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        out.push(parse_line(text).map_err(|reason| CtxError::ParseError {
            line: line_no,
            reason,
        })?);
    }
    Ok(out)
}

fn parse_line(text: &str) -> std::result::Result<TextRecord, String> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() < 6 {
        return Err(format!("expected at least 6 fields, got {}", fields.len()));
    }
    let scale_id: usize = fields[0]
        .parse()
        .map_err(|_| format!("bad scale_id {:?}", fields[0]))?;
    let coord = |i: usize| -> std::result::Result<i64, String> {
        fields[i]
            .parse()
            .map_err(|_| format!("bad coordinate {:?}", fields[i]))
    };
    let rect = Rect::new(coord(2)?, coord(3)?, coord(4)?, coord(5)?)
        .map_err(|e| e.to_string())?;
    match fields[1] {
        "positive" | "negative" => {
            if fields.len() != 6 {
                return Err(format!(
                    "window records take 6 fields, got {}",
                    fields.len()
                ));
            }
            let kind = if fields[1] == "positive" {
                WindowKind::Positive
            } else {
                WindowKind::Negative
            };
            Ok(TextRecord::Window(Window {
                rect,
                scale_id,
                kind,
            }))
        }
        "proposal" => {
            if fields.len() != 8 {
                return Err(format!(
                    "proposal records take 8 fields, got {}",
                    fields.len()
                ));
            }
            let score: f64 = fields[6]
                .parse()
                .map_err(|_| format!("bad score {:?}", fields[6]))?;
            if !(0.0..=1.0).contains(&score) {
                return Err(format!("score {score} outside [0,1]"));
            }
            let slice_z: usize = fields[7]
                .parse()
                .map_err(|_| format!("bad slice index {:?}", fields[7]))?;
            Ok(TextRecord::Proposal(Proposal {
                rect,
                score,
                slice_z,
                scale_id,
            }))
        }
        other => Err(format!("unknown record kind {other:?}")),
    }
}
