//! Flow-record ingestion: CSV parsing, signal extraction, synthetic traces
//! and fixed-size windows.

mod record;
mod signal;
mod synth;
mod window;

pub use record::{format_record, parse_record, FlowRecord};
pub use signal::{
    fold_pair, pair_candidates, Extractor, KeySpec, SignalSpec, Update, ValueSpec, PAIR_GAMMA,
};
pub use synth::{generate, Generator, Plant, PlantedHitter, SyntheticConfig};
pub use window::{try_windows, windows, Batch, TryWindows, Windows};

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Lines, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "ts,src,dst,sport,dport,proto,packets,bytes,ttl";

fn is_gzip(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("gz"))
}

/// Line-numbered record reader. Blank lines, `#` comments and a leading
/// header line are skipped.
pub struct RecordReader<R> {
    lines: Lines<R>,
    line: usize,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line: 0,
        }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<FlowRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(Error::Io(e))),
            };
            self.line += 1;
            let trimmed = text.trim();
            if trimmed.is_empty()
                || trimmed.starts_with('#')
                || (self.line == 1 && trimmed.starts_with("ts,"))
            {
                continue;
            }
            return Some(parse_record(trimmed).map_err(|e| Error::Parse(e.at_line(self.line))));
        }
    }
}

/// Opens a CSV trace, decompressing when the file name ends in `.gz`.
pub fn open_records(path: &Path) -> Result<RecordReader<Box<dyn BufRead>>> {
    let file = File::open(path)?;
    let inner: Box<dyn Read> = if is_gzip(path) {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(RecordReader::new(Box::new(BufReader::with_capacity(
        1 << 16,
        inner,
    ))))
}

/// Buffered writer, gzip-compressed when the file name ends in `.gz`.
pub fn create_output(path: &Path) -> Result<Box<dyn Write>> {
    let file = BufWriter::with_capacity(1 << 16, File::create(path)?);
    Ok(if is_gzip(path) {
        Box::new(GzEncoder::new(file, Compression::default()))
    } else {
        Box::new(file)
    })
}

/// Writes a header line and one CSV line per record.
pub fn write_records<W, I>(out: &mut W, records: I) -> io::Result<usize>
where
    W: Write + ?Sized,
    I: IntoIterator<Item = FlowRecord>,
{
    writeln!(out, "{CSV_HEADER}")?;
    let mut n = 0;
    for r in records {
        writeln!(out, "{}", format_record(&r))?;
        n += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reader_skips_header_and_comments() {
        let text = format!("{CSV_HEADER}\n# note\n\n1,1.2.3.4,5.6.7.8,1,2,6,1,40\n");
        let recs: Vec<_> = RecordReader::new(text.as_bytes())
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn reader_reports_line_numbers() {
        let text = "1,1.2.3.4,5.6.7.8,1,2,6,1,40\nx,y\n";
        let err = RecordReader::new(text.as_bytes())
            .nth(1)
            .unwrap()
            .unwrap_err();
        match err {
            Error::Parse(p) => assert_eq!((p.line, p.field), (Some(2), 1)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn gzip_round_trip() {
        let dir = std::env::temp_dir().join(format!("hp-stream-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let recs: Vec<_> = generate(&SyntheticConfig {
            n_records: 500,
            ..Default::default()
        })
        .unwrap()
        .collect();
        for name in ["t.csv", "t.csv.gz"] {
            let path = dir.join(name);
            {
                let mut out = create_output(&path).unwrap();
                write_records(&mut out, recs.iter().copied()).unwrap();
                out.flush().unwrap();
            }
            let back: Vec<_> = open_records(&path).unwrap().collect::<Result<_>>().unwrap();
            assert_eq!(back, recs);
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
