//! Timestamped grayscale frame I/O: binary PGM codec plus raw Y8, Y4M,
//! and PGM-sequence stream readers.
//!
//! Containers here carry no per-frame timestamps, so frame `i` of a
//! stream is stamped `round(i * 1e6 / fps)` microseconds. Y4M streams
//! use the frame rate declared in their header; the other formats use
//! the nominal rate supplied by the caller.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// A single grayscale frame: row-major 8-bit luma, top-left first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    /// Microseconds since the start of the stream this frame belongs to.
    pub timestamp_us: u64,
    luma: Vec<u8>,
}

impl Frame {
    /// Panics if dimensions are zero or `luma.len() != width * height`.
    pub fn new(width: u32, height: u32, timestamp_us: u64, luma: Vec<u8>) -> Frame {
        assert!(width > 0 && height > 0, "frame dimensions must be positive");
        assert_eq!(
            luma.len(),
            width as usize * height as usize,
            "luma length must equal width * height"
        );
        Frame {
            width,
            height,
            timestamp_us,
            luma,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn luma(&self) -> &[u8] {
        &self.luma
    }

    pub fn pixel(&self, x: u32, y: u32) -> u8 {
        self.luma[y as usize * self.width as usize + x as usize]
    }
}

#[derive(Debug, Error)]
pub enum FrameIoError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} bytes, got {got}")]
    TruncatedPayload { expected: usize, got: usize },
    #[error("unsupported maxval {0} (must be <= 255)")]
    UnsupportedMaxval(u32),
    #[error("format mismatch: {0}")]
    FormatMismatch(String),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

/// Synthesized timestamp for frame `index` at the given nominal rate.
pub fn synth_timestamp_us(index: u64, fps: f64) -> u64 {
    (index as f64 * 1_000_000.0 / fps).round() as u64
}

// ---------------------------------------------------------------------------
// PGM codec
// ---------------------------------------------------------------------------

/// Decode a binary PGM (magic "P5", maxval <= 255). `#` comments are
/// permitted anywhere whitespace is. The returned frame has timestamp 0.
/// Bytes past the declared payload are ignored.
pub fn decode_pgm(bytes: &[u8]) -> Result<Frame, FrameIoError> {
    let mut pos = 0usize;

    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(FrameIoError::MalformedHeader("missing P5 magic".into()));
    }
    pos += 2;

    let width = read_header_number(bytes, &mut pos)?;
    let height = read_header_number(bytes, &mut pos)?;
    let maxval = read_header_number(bytes, &mut pos)?;
    if maxval > 255 {
        return Err(FrameIoError::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(FrameIoError::MalformedHeader("zero dimension".into()));
    }

    // Exactly one whitespace byte separates the header from the payload.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(FrameIoError::MalformedHeader(
                "missing whitespace before payload".into(),
            ))
        }
    }

    let expected = width as usize * height as usize;
    let got = bytes.len() - pos;
    if got < expected {
        return Err(FrameIoError::TruncatedPayload { expected, got });
    }
    let luma = bytes[pos..pos + expected].to_vec();
    Ok(Frame::new(width, height, 0, luma))
}

/// Skip whitespace and `#` comments, then parse an unsigned decimal.
fn read_header_number(bytes: &[u8], pos: &mut usize) -> Result<u32, FrameIoError> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(b) = bytes.get(*pos) {
                    *pos += 1;
                    if *b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if *pos == start {
        return Err(FrameIoError::MalformedHeader(
            "expected a decimal number in header".into(),
        ));
    }
    let text = std::str::from_utf8(&bytes[start..*pos]).expect("digits are ascii");
    text.parse::<u32>()
        .map_err(|_| FrameIoError::MalformedHeader(format!("number out of range: {text}")))
}

/// Encode a frame as canonical binary PGM: `P5\n{w} {h}\n255\n` + luma.
pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", frame.width, frame.height);
    let mut out = Vec::with_capacity(header.len() + frame.luma.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&frame.luma);
    out
}

// ---------------------------------------------------------------------------
// Streaming sources
// ---------------------------------------------------------------------------

/// Stream container format. Raw Y8 carries no dimensions, so they must
/// be supplied by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StreamFormat {
    /// Directory of `.pgm` files, consumed in lexicographic filename order.
    PgmSequence,
    /// Concatenated width*height luma planes, no header.
    RawY8 { width: u32, height: u32 },
    /// YUV4MPEG2; only the Y plane is read, chroma planes are skipped.
    Y4m,
}

/// Where the stream bytes come from.
pub enum StreamInput {
    Path(PathBuf),
    Stdin,
    /// In-memory bytes (tests, generated content).
    Bytes(Vec<u8>),
}

/// A sequential source of frames with fixed, known dimensions.
///
/// Yields `Result<Frame, _>`: a mid-stream error (for example a trailing
/// partial frame) arrives after every complete frame before it.
pub struct FrameSource {
    width: u32,
    height: u32,
    fps: f64,
    inner: Box<dyn Iterator<Item = Result<Frame, FrameIoError>> + Send>,
}

impl FrameSource {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Rate used for timestamp synthesis (header rate for Y4M, nominal otherwise).
    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Wrap an arbitrary frame iterator (used by the simulator).
    pub fn from_iter<I>(width: u32, height: u32, fps: f64, iter: I) -> FrameSource
    where
        I: Iterator<Item = Result<Frame, FrameIoError>> + Send + 'static,
    {
        FrameSource {
            width,
            height,
            fps,
            inner: Box::new(iter),
        }
    }
}

impl Iterator for FrameSource {
    type Item = Result<Frame, FrameIoError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.inner.next()
    }
}

impl std::fmt::Debug for FrameSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrameSource")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("fps", &self.fps)
            .finish_non_exhaustive()
    }
}

/// Open a frame stream. `nominal_fps` must be positive; it drives
/// timestamp synthesis for containers that declare no rate of their own.
pub fn open_stream(
    input: StreamInput,
    format: StreamFormat,
    nominal_fps: f64,
) -> Result<FrameSource, FrameIoError> {
    if nominal_fps.is_nan() || nominal_fps <= 0.0 {
        return Err(FrameIoError::FormatMismatch(format!(
            "nominal_fps must be positive, got {nominal_fps}"
        )));
    }
    match format {
        StreamFormat::PgmSequence => {
            let dir = match input {
                StreamInput::Path(p) => p,
                _ => {
                    return Err(FrameIoError::FormatMismatch(
                        "pgm-sequence requires a directory path".into(),
                    ))
                }
            };
            open_pgm_sequence(&dir, nominal_fps)
        }
        StreamFormat::RawY8 { width, height } => {
            if width == 0 || height == 0 {
                return Err(FrameIoError::FormatMismatch(
                    "raw-y8 requires positive dimensions".into(),
                ));
            }
            let reader = input_reader(input)?;
            Ok(FrameSource {
                width,
                height,
                fps: nominal_fps,
                inner: Box::new(RawY8Reader {
                    reader,
                    width,
                    height,
                    fps: nominal_fps,
                    index: 0,
                    done: false,
                }),
            })
        }
        StreamFormat::Y4m => {
            let reader = input_reader(input)?;
            open_y4m(reader, nominal_fps)
        }
    }
}

fn input_reader(input: StreamInput) -> Result<Box<dyn Read + Send>, FrameIoError> {
    Ok(match input {
        StreamInput::Path(p) => Box::new(fs::File::open(p)?),
        StreamInput::Stdin => Box::new(io::stdin()),
        StreamInput::Bytes(b) => Box::new(io::Cursor::new(b)),
    })
}

fn open_pgm_sequence(dir: &Path, fps: f64) -> Result<FrameSource, FrameIoError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            p.extension()
                .map(|e| e.eq_ignore_ascii_case("pgm"))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(FrameIoError::FormatMismatch(format!(
            "no .pgm files in {}",
            dir.display()
        )));
    }

    // Dimensions are fixed by the first frame; later mismatches are errors.
    let first = decode_pgm(&fs::read(&files[0])?)?;
    let (width, height) = (first.width, first.height);

    let iter = files.into_iter().enumerate().map(move |(i, path)| {
        let mut frame = decode_pgm(&fs::read(&path)?)?;
        if frame.width != width || frame.height != height {
            return Err(FrameIoError::FormatMismatch(format!(
                "{}: dimensions {}x{} differ from stream {}x{}",
                path.display(),
                frame.width,
                frame.height,
                width,
                height
            )));
        }
        frame.timestamp_us = synth_timestamp_us(i as u64, fps);
        Ok(frame)
    });

    Ok(FrameSource {
        width,
        height,
        fps,
        inner: Box::new(iter),
    })
}

struct RawY8Reader {
    reader: Box<dyn Read + Send>,
    width: u32,
    height: u32,
    fps: f64,
    index: u64,
    done: bool,
}

impl Iterator for RawY8Reader {
    type Item = Result<Frame, FrameIoError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let size = self.width as usize * self.height as usize;
        let mut buf = vec![0u8; size];
        match read_exact_or_eof(&mut self.reader, &mut buf) {
            Ok(0) => {
                self.done = true;
                None
            }
            Ok(n) if n == size => {
                let t = synth_timestamp_us(self.index, self.fps);
                self.index += 1;
                Some(Ok(Frame::new(self.width, self.height, t, buf)))
            }
            Ok(n) => {
                self.done = true;
                Some(Err(FrameIoError::FormatMismatch(format!(
                    "raw stream length is not a multiple of the frame size \
                     (trailing {n} of {size} bytes)"
                ))))
            }
            Err(e) => {
                self.done = true;
                Some(Err(e.into()))
            }
        }
    }
}

/// Fill `buf` as far as possible; returns the number of bytes read
/// (0 on immediate EOF, `buf.len()` when complete).
fn read_exact_or_eof(reader: &mut dyn Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

// ---------------------------------------------------------------------------
// Y4M
// ---------------------------------------------------------------------------

fn open_y4m(
    mut reader: Box<dyn Read + Send>,
    nominal_fps: f64,
) -> Result<FrameSource, FrameIoError> {
    let header = read_line(&mut reader)?;
    let header = String::from_utf8(header)
        .map_err(|_| FrameIoError::FormatMismatch("y4m header is not ASCII".into()))?;
    let mut parts = header.split(' ');
    if parts.next() != Some("YUV4MPEG2") {
        return Err(FrameIoError::FormatMismatch(
            "y4m header absent (expected YUV4MPEG2 signature)".into(),
        ));
    }

    let mut width = 0u32;
    let mut height = 0u32;
    let mut fps = nominal_fps;
    let mut colorspace = "420".to_string();
    for p in parts {
        let (tag, value) = match p.chars().next() {
            Some(c) => (c, &p[1..]),
            None => continue,
        };
        match tag {
            'W' => {
                width = value
                    .parse()
                    .map_err(|_| FrameIoError::FormatMismatch(format!("bad y4m width: {value}")))?
            }
            'H' => {
                height = value
                    .parse()
                    .map_err(|_| FrameIoError::FormatMismatch(format!("bad y4m height: {value}")))?
            }
            'F' => {
                let (num, den) = value.split_once(':').ok_or_else(|| {
                    FrameIoError::FormatMismatch(format!("bad y4m frame rate: {value}"))
                })?;
                let num: f64 = num.parse().map_err(|_| {
                    FrameIoError::FormatMismatch(format!("bad y4m frame rate: {value}"))
                })?;
                let den: f64 = den.parse().map_err(|_| {
                    FrameIoError::FormatMismatch(format!("bad y4m frame rate: {value}"))
                })?;
                if num > 0.0 && den > 0.0 {
                    fps = num / den;
                }
            }
            'C' => colorspace = value.to_string(),
            // Interlacing and aspect tags do not affect the Y plane.
            _ => {}
        }
    }
    if width == 0 || height == 0 {
        return Err(FrameIoError::FormatMismatch(
            "y4m header is missing W or H".into(),
        ));
    }

    let chroma_bytes = chroma_plane_bytes(&colorspace, width, height)?;

    Ok(FrameSource {
        width,
        height,
        fps,
        inner: Box::new(Y4mReader {
            reader,
            width,
            height,
            fps,
            chroma_bytes,
            index: 0,
            done: false,
        }),
    })
}

/// Total chroma bytes per frame for the given colorspace tag.
fn chroma_plane_bytes(colorspace: &str, w: u32, h: u32) -> Result<usize, FrameIoError> {
    let (w, h) = (w as usize, h as usize);
    match colorspace {
        "mono" => Ok(0),
        "420" | "420jpeg" | "420paldv" | "420mpeg2" => Ok(2 * (w / 2) * (h / 2)),
        "422" => Ok(2 * (w / 2) * h),
        "444" => Ok(2 * w * h),
        other => Err(FrameIoError::FormatMismatch(format!(
            "unsupported y4m colorspace C{other}"
        ))),
    }
}

struct Y4mReader {
    reader: Box<dyn Read + Send>,
    width: u32,
    height: u32,
    fps: f64,
    chroma_bytes: usize,
    index: u64,
    done: bool,
}

impl Iterator for Y4mReader {
    type Item = Result<Frame, FrameIoError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        // FRAME marker line (optional parameters up to '\n').
        let line = match read_line(&mut self.reader) {
            Ok(l) => l,
            Err(e) => {
                self.done = true;
                return Some(Err(e));
            }
        };
        if line.is_empty() {
            self.done = true;
            return None; // clean EOF
        }
        if !line.starts_with(b"FRAME") {
            self.done = true;
            return Some(Err(FrameIoError::FormatMismatch(
                "expected FRAME marker in y4m stream".into(),
            )));
        }

        let y_size = self.width as usize * self.height as usize;
        let mut luma = vec![0u8; y_size];
        match read_exact_or_eof(&mut self.reader, &mut luma) {
            Ok(n) if n == y_size => {}
            Ok(n) => {
                self.done = true;
                return Some(Err(FrameIoError::TruncatedPayload {
                    expected: y_size,
                    got: n,
                }));
            }
            Err(e) => {
                self.done = true;
                return Some(Err(e.into()));
            }
        }
        let mut chroma = vec![0u8; self.chroma_bytes];
        match read_exact_or_eof(&mut self.reader, &mut chroma) {
            Ok(n) if n == self.chroma_bytes => {}
            Ok(n) => {
                self.done = true;
                return Some(Err(FrameIoError::TruncatedPayload {
                    expected: self.chroma_bytes,
                    got: n,
                }));
            }
            Err(e) => {
                self.done = true;
                return Some(Err(e.into()));
            }
        }

        let t = synth_timestamp_us(self.index, self.fps);
        self.index += 1;
        Some(Ok(Frame::new(self.width, self.height, t, luma)))
    }
}

/// Read bytes up to and excluding '\n'. Empty result means EOF.
fn read_line(reader: &mut dyn Read) -> Result<Vec<u8>, FrameIoError> {
    let mut line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        match reader.read(&mut byte) {
            Ok(0) => break,
            Ok(_) => {
                if byte[0] == b'\n' {
                    return Ok(line);
                }
                line.push(byte[0]);
                if line.len() > 4096 {
                    return Err(FrameIoError::FormatMismatch(
                        "unterminated header line".into(),
                    ));
                }
            }
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(line)
}

/// Write a Y4M stream (Cmono) from frames. Used by the simulate command;
/// the reader above round-trips it.
pub fn write_y4m<W: io::Write>(
    out: &mut W,
    width: u32,
    height: u32,
    fps: f64,
    frames: impl Iterator<Item = Frame>,
) -> io::Result<()> {
    let (num, den) = if (fps - fps.round()).abs() < 1e-9 {
        (fps.round() as u64, 1u64)
    } else {
        ((fps * 1000.0).round() as u64, 1000u64)
    };
    writeln!(
        out,
        "YUV4MPEG2 W{width} H{height} F{num}:{den} Ip A1:1 Cmono"
    )?;
    for frame in frames {
        out.write_all(b"FRAME\n")?;
        out.write_all(frame.luma())?;
    }
    Ok(())
}
