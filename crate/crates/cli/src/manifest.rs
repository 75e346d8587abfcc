//! Run configuration files.
//!
//! Plain text, one `key = value` per line, `#` starts a comment:
//!
//! ```text
//! domain = -20 20 -20 20 -20 20     # a1 b1 a2 b2 a3 b3, physical box
//! grid = 40 40 40                   # physical samples per axis
//! mirror = 1 1 1                    # double the box across the upper faces
//! final_time = 20
//! steps = 200
//! snapshots = 10                    # save intervals; 11 files incl. t = 0
//! output_dir = reconnection
//! prefix = snap
//! vortex = 2 0 0  0 1 0  1          # point, direction, charge
//! vortex = -2 0 0  0 0 1  1
//! ```
//!
//! `vortex` may repeat; every other key appears at most once. `mirror`,
//! `snapshots`, `output_dir` and `prefix` are optional.

use std::fmt;
use std::path::{Path, PathBuf};

use fourier3::fourier::{DomainBox, GridSize};
use fourier3::gpe::SimConfig;
use fourier3::vortex::VortexSpec;

use crate::error::{CliError, Result};

/// A vortex line as written in the file. The direction is kept as given, so
/// a manifest survives a write and read unchanged; [`VortexSpec`] normalizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexLine {
    pub point: [f64; 3],
    pub direction: [f64; 3],
    pub charge: i32,
}

impl VortexLine {
    pub fn spec(&self) -> Result<VortexSpec> {
        Ok(VortexSpec::new(self.point, self.direction, self.charge)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: SimConfig,
    pub vortices: Vec<VortexLine>,
    pub output_dir: PathBuf,
    pub prefix: String,
}

impl RunManifest {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| CliError::Config {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut domain = None;
        let mut grid = None;
        let mut mirror = None;
        let mut final_time = None;
        let mut steps = None;
        let mut snapshots = None;
        let mut output_dir = None;
        let mut prefix = None;
        let mut vortices = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let once = |slot_filled: bool| {
                if slot_filled {
                    Err(err(line, format!("`{key}` given twice")))
                } else {
                    Ok(())
                }
            };
            match key {
                "domain" => {
                    once(domain.is_some())?;
                    let v: [f64; 6] = numbers(value).map_err(|m| err(line, m))?;
                    let d = DomainBox::new([v[0], v[2], v[4]], [v[1], v[3], v[5]]).map_err(|e| err(line, e.to_string()))?;
                    domain = Some(d);
                }
                "grid" => {
                    once(grid.is_some())?;
                    let n: [usize; 3] = numbers(value).map_err(|m| err(line, m))?;
                    grid = Some(GridSize::new(n).map_err(|e| err(line, e.to_string()))?);
                }
                "mirror" => {
                    once(mirror.is_some())?;
                    let flags: [u8; 3] = numbers(value).map_err(|m| err(line, m))?;
                    if flags.iter().any(|&f| f > 1) {
                        return Err(err(line, format!("mirror flags must be 0 or 1, found `{value}`")));
                    }
                    mirror = Some(flags.map(|f| f == 1));
                }
                "final_time" => {
                    once(final_time.is_some())?;
                    final_time = Some(number::<f64>(value).map_err(|m| err(line, m))?);
                }
                "steps" => {
                    once(steps.is_some())?;
                    steps = Some(number::<usize>(value).map_err(|m| err(line, m))?);
                }
                "snapshots" => {
                    once(snapshots.is_some())?;
                    snapshots = Some(number::<usize>(value).map_err(|m| err(line, m))?);
                }
                "output_dir" => {
                    once(output_dir.is_some())?;
                    output_dir = Some(PathBuf::from(value));
                }
                "prefix" => {
                    once(prefix.is_some())?;
                    if value.is_empty() || value.contains(['/', '\\']) {
                        return Err(err(line, format!("prefix `{value}` must be a nonempty file name")));
                    }
                    prefix = Some(value.to_string());
                }
                "vortex" => {
                    let v: [f64; 7] = numbers(value).map_err(|m| err(line, m))?;
                    if v[6].fract() != 0.0 {
                        return Err(err(line, format!("vortex charge {} is not an integer", v[6])));
                    }
                    let vortex = VortexLine {
                        point: [v[0], v[1], v[2]],
                        direction: [v[3], v[4], v[5]],
                        charge: v[6] as i32,
                    };
                    vortex.spec().map_err(|e| err(line, e.to_string()))?;
                    vortices.push(vortex);
                }
                other => return Err(err(line, format!("unknown key `{other}`"))),
            }
        }

        let missing = |key: &str| err(0, format!("missing required key `{key}`"));
        let config = SimConfig {
            physical_domain: domain.ok_or_else(|| missing("domain"))?,
            grid: grid.ok_or_else(|| missing("grid"))?,
            mirror: mirror.unwrap_or([false; 3]),
            final_time: final_time.ok_or_else(|| missing("final_time"))?,
            steps: steps.ok_or_else(|| missing("steps"))?,
            snapshot_count: snapshots.unwrap_or(1),
        };
        config.validate().map_err(|e| err(0, e.to_string()))?;
        Ok(Self {
            config,
            vortices,
            output_dir: output_dir.unwrap_or_else(|| PathBuf::from(".")),
            prefix: prefix.unwrap_or_else(|| "snap".to_string()),
        })
    }

    /// Reads a config file. A relative `output_dir` is taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::file(path))?;
        let mut manifest = Self::parse(&text, path)?;
        if manifest.output_dir.is_relative() {
            if let Some(parent) = path.parent() {
                manifest.output_dir = parent.join(&manifest.output_dir);
            }
        }
        Ok(manifest)
    }

    pub fn vortex_specs(&self) -> Result<Vec<VortexSpec>> {
        self.vortices.iter().map(VortexLine::spec).collect()
    }

    /// `prefix_0003.sfs` for the snapshot at save index 3. Indices are padded
    /// to at least four digits, more if the run saves that many.
    pub fn snapshot_name(&self, index: usize) -> String {
        let width = self.config.snapshot_count.to_string().len().max(4);
        format!("{}_{index:0width$}.sfs", self.prefix)
    }

    pub fn snapshot_names(&self) -> Vec<String> {
        (0..=self.config.snapshot_count).map(|i| self.snapshot_name(i)).collect()
    }
}

impl fmt::Display for RunManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        let (a, b) = (c.physical_domain.lower(), c.physical_domain.upper());
        let n = c.grid.dims();
        writeln!(f, "domain = {} {} {} {} {} {}", a[0], b[0], a[1], b[1], a[2], b[2])?;
        writeln!(f, "grid = {} {} {}", n[0], n[1], n[2])?;
        let m = c.mirror.map(u8::from);
        writeln!(f, "mirror = {} {} {}", m[0], m[1], m[2])?;
        writeln!(f, "final_time = {}", c.final_time)?;
        writeln!(f, "steps = {}", c.steps)?;
        writeln!(f, "snapshots = {}", c.snapshot_count)?;
        writeln!(f, "output_dir = {}", self.output_dir.display())?;
        writeln!(f, "prefix = {}", self.prefix)?;
        for v in &self.vortices {
            let (p, d) = (v.point, v.direction);
            writeln!(f, "vortex = {} {} {}  {} {} {}  {}", p[0], p[1], p[2], d[0], d[1], d[2], v.charge)?;
        }
        Ok(())
    }
}

fn number<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse `{s}` as a number"))
}

fn numbers<T: std::str::FromStr + Copy + Default, const K: usize>(s: &str) -> std::result::Result<[T; K], String> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != K {
        return Err(format!("expected {K} values, found {} in `{s}`", parts.len()));
    }
    let mut out = [T::default(); K];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = number(p)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# two lines crossing
domain = -20 20 -20 20 -20 20
grid = 40 40 40
mirror = 1 1 1
final_time = 20
steps = 200
snapshots = 10
vortex = 2 0 0  0 1 0  1
vortex = -2 0 0  0 0 1  1   # second
";

    fn parse(text: &str) -> Result<RunManifest> {
        RunManifest::parse(text, Path::new("test.cfg"))
    }

    #[test]
    fn parses_and_round_trips() {
        let m = parse(SAMPLE).unwrap();
        assert_eq!(m.config.computational_size().dims(), [80, 80, 80]);
        assert_eq!(m.vortices.len(), 2);
        assert_eq!(m.prefix, "snap");
        assert_eq!(parse(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn awkward_numbers_round_trip() {
        let mut m = parse(SAMPLE).unwrap();
        m.vortices[0].direction = [0.1, 1.0 / 3.0, -1e-300];
        m.config.final_time = 0.1 + 0.2;
        assert_eq!(parse(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn snapshot_names_are_padded() {
        let m = parse(SAMPLE).unwrap();
        assert_eq!(m.snapshot_name(3), "snap_0003.sfs");
        assert_eq!(m.snapshot_names().len(), 11);
        let mut big = m.clone();
        big.config.snapshot_count = 20_000;
        big.config.steps = 20_000;
        assert_eq!(big.snapshot_name(7), "snap_00007.sfs");
    }

    #[test]
    fn rejects_bad_input() {
        let cases = [
            ("domain = 0 1 0 1 0\n", "expected 6 values"),
            ("domain = 1 0 0 1 0 1\n", "invalid domain"),
            ("grid = 3 4 4\n", "even"),
            ("mirror = 1 2 0\n", "mirror flags"),
            ("vortex = 0 0 0 0 0 0 1\n", "nonzero"),
            ("vortex = 0 0 0 0 0 1 2\n", "charge"),
            ("speed = 3\n", "unknown key"),
            ("steps = 10\nsteps = 10\n", "twice"),
            ("no equals sign\n", "key = value"),
        ];
        for (text, needle) in cases {
            let msg = parse(text).unwrap_err().to_string();
            assert!(msg.contains(needle), "{text:?}: {msg}");
        }
        let msg = parse("grid = 4 4 4\n").unwrap_err().to_string();
        assert!(msg.contains("missing required key `domain`"), "{msg}");
        let partial = "domain = 0 1 0 1 0 1\ngrid = 4 4 4\nfinal_time = 1\nsteps = 10\nsnapshots = 3\n";
        assert!(parse(partial).unwrap_err().to_string().contains("divide"));
    }

    #[test]
    fn zero_vortices_is_fine() {
        let text = "domain = 0 1 0 1 0 1\ngrid = 4 4 4\nfinal_time = 0\nsteps = 1\n";
        let m = parse(text).unwrap();
        assert!(m.vortices.is_empty());
        assert_eq!(m.config.mirror, [false; 3]);
        assert_eq!(m.config.snapshot_count, 1);
    }
}
