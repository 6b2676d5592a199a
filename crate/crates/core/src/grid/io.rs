//! PGM + YAML map file I/O, byte-compatible with ROS `map_server` maps.
//!
//! The PGM image follows the usual map convention: row 0 is the top of
//! the image, while grid row 0 is the bottom (the cell at the map
//! origin), so rows are flipped on load and save. Gray values classify
//! as, in order:
//!
//! 1. inside the unknown band `[100, 250)` -> unknown,
//! 2. `gray >= 255 * (1 - free_thresh)` -> free (raw 0),
//! 3. `gray <= 255 * occupied_thresh` -> occupied (raw 100),
//! 4. otherwise proportionally, `raw = round(100 * (255 - gray) / 255)`.
//!
//! Under the default thresholds (0.196 / 0.65) this reduces to the
//! ternary mapping: `< 100` occupied, `[100, 250)` unknown, `>= 250`
//! free. Saving writes unknown as 205, free as 254 and occupied as 0,
//! so `load(save(g)) == g` bit-exactly for any ternary grid.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::{Cell, OccupancyGrid, Pose, UNKNOWN_RAW};
use crate::error::MapError;

/// Gray values in `[LO, HI)` load as unknown.
const UNKNOWN_GRAY_LO: u8 = 100;
const UNKNOWN_GRAY_HI: u8 = 250;

/// Gray written for unknown cells.
const UNKNOWN_GRAY: u8 = 205;
/// Gray written for free cells (ROS `map_saver` convention).
const FREE_GRAY: u8 = 254;
/// Gray written for occupied cells.
const OCCUPIED_GRAY: u8 = 0;

#[derive(Debug)]
struct MapYaml {
    resolution: f64,
    origin: Pose,
    negate: bool,
    occupied_thresh: f64,
    free_thresh: f64,
}

fn yaml_err(path: &Path, reason: impl Into<String>) -> MapError {
    MapError::MalformedYaml {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn pgm_err(path: &Path, reason: impl Into<String>) -> MapError {
    MapError::MalformedPgm {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Parse the flat key subset of a map_server YAML sidecar.
fn parse_yaml(path: &Path) -> Result<MapYaml, MapError> {
    let text = fs::read_to_string(path)?;
    let mut resolution = None;
    let mut origin = None;
    let mut negate = false;
    let mut occupied_thresh = 0.65;
    let mut free_thresh = 0.196;

    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "resolution" => {
                resolution = Some(
                    value
                        .parse::<f64>()
                        .map_err(|_| yaml_err(path, format!("bad resolution '{value}'")))?,
                );
            }
            "origin" => {
                let inner = value
                    .strip_prefix('[')
                    .and_then(|v| v.strip_suffix(']'))
                    .ok_or_else(|| yaml_err(path, format!("bad origin '{value}'")))?;
                let parts: Vec<f64> = inner
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| yaml_err(path, format!("bad origin '{value}'")))?;
                if parts.len() != 3 {
                    return Err(yaml_err(path, "origin must have three components"));
                }
                origin = Some(Pose::new(parts[0], parts[1], parts[2]));
            }
            "negate" => {
                negate = value == "1" || value == "true";
            }
            "occupied_thresh" => {
                occupied_thresh = value
                    .parse::<f64>()
                    .map_err(|_| yaml_err(path, format!("bad occupied_thresh '{value}'")))?;
            }
            "free_thresh" => {
                free_thresh = value
                    .parse::<f64>()
                    .map_err(|_| yaml_err(path, format!("bad free_thresh '{value}'")))?;
            }
            // `image` and anything else is ignored; callers pass the PGM
            // path explicitly.
            _ => {}
        }
    }

    let resolution = resolution.ok_or_else(|| yaml_err(path, "missing resolution"))?;
    if resolution <= 0.0 {
        return Err(yaml_err(path, "resolution must be positive"));
    }
    let origin = origin.ok_or_else(|| yaml_err(path, "missing origin"))?;
    Ok(MapYaml {
        resolution,
        origin,
        negate,
        occupied_thresh,
        free_thresh,
    })
}

/// Parse a P2 (ASCII) or P5 (binary) PGM into `(width, height, pixels)`.
fn parse_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>), MapError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 2 {
        return Err(pgm_err(path, "file too short"));
    }
    let magic = &bytes[..2];
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(pgm_err(path, "magic must be P2 or P5")),
    };

    // Tokenize the header: whitespace-separated fields, '#' comments to
    // end of line. `pos` ends one whitespace byte after maxval.
    let mut pos = 2usize;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // skip whitespace and comments
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(pgm_err(path, "truncated header"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap();
        *field = text
            .parse::<usize>()
            .map_err(|_| pgm_err(path, format!("bad header field '{text}'")))?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(pgm_err(path, "zero dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(pgm_err(path, format!("unsupported maxval {maxval}")));
    }

    let expected = width * height;
    let pixels = if binary {
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(pgm_err(path, "missing separator before raster"));
        }
        pos += 1;
        let raster = &bytes[pos..];
        if raster.len() < expected {
            return Err(pgm_err(
                path,
                format!("raster has {} bytes, header promises {expected}", raster.len()),
            ));
        }
        raster[..expected].to_vec()
    } else {
        let text = std::str::from_utf8(&bytes[pos..])
            .map_err(|_| pgm_err(path, "P2 raster is not ASCII"))?;
        let mut values = Vec::with_capacity(expected);
        for token in text
            .lines()
            .flat_map(|l| l.split('#').next().unwrap_or("").split_ascii_whitespace())
        {
            let v = token
                .parse::<u16>()
                .map_err(|_| pgm_err(path, format!("bad pixel '{token}'")))?;
            if v as usize > maxval {
                return Err(pgm_err(path, format!("pixel {v} exceeds maxval {maxval}")));
            }
            values.push(v as u8);
        }
        if values.len() != expected {
            return Err(pgm_err(
                path,
                format!("raster has {} pixels, header promises {expected}", values.len()),
            ));
        }
        values
    };
    Ok((width, height, pixels))
}

fn classify_gray(gray: u8, occupied_thresh: f64, free_thresh: f64) -> i8 {
    if (UNKNOWN_GRAY_LO..UNKNOWN_GRAY_HI).contains(&gray) {
        UNKNOWN_RAW
    } else if gray as f64 >= 255.0 * (1.0 - free_thresh) {
        0
    } else if gray as f64 <= 255.0 * occupied_thresh {
        100
    } else {
        (100.0 * (255.0 - gray as f64) / 255.0).round() as i8
    }
}

/// Load an occupancy grid from a PGM image and its YAML sidecar.
pub fn load_map(pgm_path: impl AsRef<Path>, yaml_path: impl AsRef<Path>) -> Result<OccupancyGrid, MapError> {
    let pgm_path = pgm_path.as_ref();
    let yaml_path = yaml_path.as_ref();
    let meta = parse_yaml(yaml_path)?;
    let (width, height, pixels) = parse_pgm(pgm_path)?;

    let mut grid = OccupancyGrid::new_unknown(width, height, meta.resolution, meta.origin);
    for row in 0..height {
        for col in 0..width {
            let mut gray = pixels[row * width + col];
            if meta.negate {
                gray = 255 - gray;
            }
            let raw = classify_gray(gray, meta.occupied_thresh, meta.free_thresh);
            // image row 0 is the top; grid row 0 is the bottom
            let cell = Cell::new(col as i32, (height - 1 - row) as i32);
            grid.set_raw(cell, raw);
        }
    }
    Ok(grid)
}

fn gray_for_raw(raw: i8) -> u8 {
    match raw {
        UNKNOWN_RAW => UNKNOWN_GRAY,
        0 => FREE_GRAY,
        100 => OCCUPIED_GRAY,
        r => (255.0 * (1.0 - r as f64 / 100.0)).round() as u8,
    }
}

/// Save a grid as a binary (P5) PGM plus a YAML sidecar.
///
/// Inverse of [`load_map`] on the ternary subset: unknown cells write
/// gray 205, free cells 254, occupied cells 0. Intermediate raw values
/// write `round(255 * (1 - raw/100))` and do not round-trip exactly.
pub fn save_map(
    grid: &OccupancyGrid,
    pgm_path: impl AsRef<Path>,
    yaml_path: impl AsRef<Path>,
) -> Result<(), MapError> {
    let pgm_path = pgm_path.as_ref();
    let yaml_path = yaml_path.as_ref();

    let (width, height) = (grid.width(), grid.height());
    let mut out = Vec::with_capacity(32 + width * height);
    write!(out, "P5\n{width} {height}\n255\n")?;
    for row in 0..height {
        for col in 0..width {
            let cell = Cell::new(col as i32, (height - 1 - row) as i32);
            out.push(gray_for_raw(grid.raw(cell)));
        }
    }
    fs::write(pgm_path, out)?;

    let image = pgm_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| pgm_path.display().to_string());
    let origin = grid.origin();
    let yaml = format!(
        "image: {image}\nresolution: {}\norigin: [{}, {}, {}]\nnegate: 0\noccupied_thresh: 0.65\nfree_thresh: 0.196\n",
        grid.resolution(),
        origin.x,
        origin.y,
        origin.theta
    );
    fs::write(yaml_path, yaml)?;
    Ok(())
}
