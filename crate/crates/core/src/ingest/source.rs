use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use bzip2::read::MultiBzDecoder;
use flate2::read::MultiGzDecoder;

use super::IngestError;

const GZIP_MAGIC: &[u8] = &[0x1f, 0x8b];
const BZIP2_MAGIC: &[u8] = b"BZh";

/// Wraps a byte stream in the decoder its magic bytes call for.
pub fn decompress<R: Read + 'static>(source: R) -> io::Result<Box<dyn BufRead>> {
    let mut buffered = BufReader::with_capacity(1 << 16, source);
    let head = buffered.fill_buf()?;
    Ok(if head.starts_with(GZIP_MAGIC) {
        Box::new(BufReader::new(MultiGzDecoder::new(buffered)))
    } else if head.starts_with(BZIP2_MAGIC) {
        Box::new(BufReader::new(MultiBzDecoder::new(buffered)))
    } else {
        Box::new(buffered)
    })
}

pub fn open_source(path: impl AsRef<Path>) -> Result<File, IngestError> {
    let path = path.as_ref();
    File::open(path).map_err(|source| IngestError::Open {
        path: path.display().to_string(),
        source,
    })
}
