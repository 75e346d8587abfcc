//! Scalar fields on rectilinear grids.
//!
//! `eval-grid --out P` writes
//!
//! * `P.hdr`, text `key = value` lines: `version`, `time`, `dims`, `dtype`,
//!   `order`, `equispaced`, `rho` (payload file name), optionally `psi`,
//!   and the coordinates as `axis1`, `axis2`, `axis3`;
//! * `P.raw`, the density `|ψ|²` as little-endian `f64`, axis 3 fastest;
//! * `P.psi.raw` with `--complex`, interleaved `(re, im)` pairs in the same order;
//! * `P.vtk` with `--vtk`, a legacy binary VTK file for viewers.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array3, ArrayView2};
use num_complex::Complex64;

use fourier3::fourier::SpectralField;
use fourier3::rectilinear::{eval_rectilinear_slabs, RectilinearGrid};

use crate::error::{CliError, Result};
use crate::grid::is_equispaced;

#[derive(Debug, Clone, Copy, Default)]
pub struct FieldOptions {
    pub complex: bool,
    pub vtk: bool,
    /// Count the grid points with density at or below this value.
    pub count_below: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub points: usize,
    pub min: f64,
    pub max: f64,
    pub below: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldHeader {
    pub time: f64,
    pub axes: [Vec<f64>; 3],
    pub rho: String,
    pub psi: Option<String>,
}

impl FieldHeader {
    pub fn dims(&self) -> [usize; 3] {
        [self.axes[0].len(), self.axes[1].len(), self.axes[2].len()]
    }

    fn render(&self) -> String {
        let [m1, m2, m3] = self.dims();
        let equispaced = self.axes.iter().all(|a| is_equispaced(a));
        let mut s = format!(
            "version = 1\ntime = {}\ndims = {m1} {m2} {m3}\ndtype = f64le\norder = axis3-fastest\nequispaced = {}\nrho = {}\n",
            self.time,
            u8::from(equispaced),
            self.rho
        );
        if let Some(psi) = &self.psi {
            s += &format!("psi = {psi}\n");
        }
        for (d, axis) in self.axes.iter().enumerate() {
            let coords: Vec<String> = axis.iter().map(f64::to_string).collect();
            s += &format!("axis{} = {}\n", d + 1, coords.join(" "));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| CliError::Field(m);
        let mut time = None;
        let mut dims: Option<Vec<usize>> = None;
        let mut rho = None;
        let mut psi = None;
        let mut axes: [Option<Vec<f64>>; 3] = Default::default();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("bad header line `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            let floats = || {
                v.split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad number `{t}` in `{k}`"))))
                    .collect::<Result<Vec<f64>>>()
            };
            match k {
                "version" if v == "1" => {}
                "version" => return Err(bad(format!("unsupported version {v}"))),
                "time" => time = Some(v.parse::<f64>().map_err(|_| bad(format!("bad time `{v}`")))?),
                "dims" => {
                    dims = Some(
                        v.split_whitespace()
                            .map(|t| t.parse().map_err(|_| bad(format!("bad dimension `{t}`"))))
                            .collect::<Result<_>>()?,
                    )
                }
                "dtype" if v == "f64le" => {}
                "order" if v == "axis3-fastest" => {}
                "dtype" | "order" => return Err(bad(format!("unsupported {k} `{v}`"))),
                "equispaced" => {}
                "rho" => rho = Some(v.to_string()),
                "psi" => psi = Some(v.to_string()),
                "axis1" => axes[0] = Some(floats()?),
                "axis2" => axes[1] = Some(floats()?),
                "axis3" => axes[2] = Some(floats()?),
                other => return Err(bad(format!("unknown header key `{other}`"))),
            }
        }
        let [a1, a2, a3] = axes;
        let missing = |k: &str| bad(format!("header lacks `{k}`"));
        let header = FieldHeader {
            time: time.ok_or_else(|| missing("time"))?,
            axes: [a1.ok_or_else(|| missing("axis1"))?, a2.ok_or_else(|| missing("axis2"))?, a3.ok_or_else(|| missing("axis3"))?],
            rho: rho.ok_or_else(|| missing("rho"))?,
            psi,
        };
        let dims = dims.ok_or_else(|| missing("dims"))?;
        if dims != header.dims() {
            return Err(bad(format!("dims {dims:?} disagree with the axis lengths {:?}", header.dims())));
        }
        Ok(header)
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(CliError::file(path))?))
}

/// Evaluates `spec` on `grid` slab by slab and writes the files described in
/// the module docs under `prefix`.
pub fn write_grid_field(
    spec: &SpectralField,
    grid: &RectilinearGrid,
    time: f64,
    prefix: &Path,
    options: FieldOptions,
) -> Result<FieldStats> {
    let (rho_path, psi_path) = (with_suffix(prefix, ".raw"), with_suffix(prefix, ".psi.raw"));
    let header = FieldHeader {
        time,
        axes: grid.axes().clone(),
        rho: file_name(&rho_path),
        psi: options.complex.then(|| file_name(&psi_path)),
    };
    // Check the grid before creating any file.
    grid.check_inside(spec.domain())?;

    let mut rho_out = create(&rho_path)?;
    let mut psi_out = options.complex.then(|| create(&psi_path)).transpose()?;
    let [m1, m2, m3] = grid.dims();
    let mut kept = options.vtk.then(|| Array3::<f64>::zeros((m1, m2, m3)));
    let mut stats = FieldStats {
        points: m1 * m2 * m3,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        below: options.count_below.map(|_| 0),
    };
    eval_rectilinear_slabs(spec, grid, |i, slab: ArrayView2<'_, Complex64>| {
        let mut bytes = Vec::with_capacity(8 * slab.len());
        for v in slab.iter() {
            let r = v.norm_sqr();
            stats.min = stats.min.min(r);
            stats.max = stats.max.max(r);
            if let (Some(count), Some(t)) = (stats.below.as_mut(), options.count_below) {
                *count += usize::from(r <= t);
            }
            bytes.extend_from_slice(&r.to_le_bytes());
        }
        rho_out.write_all(&bytes)?;
        if let Some(out) = psi_out.as_mut() {
            let mut bytes = Vec::with_capacity(16 * slab.len());
            for v in slab.iter() {
                bytes.extend_from_slice(&v.re.to_le_bytes());
                bytes.extend_from_slice(&v.im.to_le_bytes());
            }
            out.write_all(&bytes)?;
        }
        if let Some(k) = kept.as_mut() {
            k.index_axis_mut(ndarray::Axis(0), i).assign(&slab.mapv(|v| v.norm_sqr()));
        }
        Ok(())
    })?;
    rho_out.flush().map_err(CliError::file(&rho_path))?;
    if let Some(mut out) = psi_out {
        out.flush().map_err(CliError::file(&psi_path))?;
    }
    let hdr_path = with_suffix(prefix, ".hdr");
    std::fs::write(&hdr_path, header.render()).map_err(CliError::file(&hdr_path))?;
    if let Some(rho) = kept {
        let vtk_path = with_suffix(prefix, ".vtk");
        write_vtk(&vtk_path, &header.axes, &rho, time)?;
    }
    Ok(stats)
}

/// Reads a header and its density payload.
pub fn read_field(hdr: &Path) -> Result<(FieldHeader, Array3<f64>)> {
    let text = std::fs::read_to_string(hdr).map_err(CliError::file(hdr))?;
    let header = FieldHeader::parse(&text)?;
    let [m1, m2, m3] = header.dims();
    let values = read_f64s(&hdr.with_file_name(&header.rho), m1 * m2 * m3)?;
    let rho = Array3::from_shape_vec((m1, m2, m3), values).expect("length checked");
    Ok((header, rho))
}

/// Reads the complex payload named in a header, if there is one.
pub fn read_psi(hdr: &Path, header: &FieldHeader) -> Result<Option<Array3<Complex64>>> {
    let Some(name) = &header.psi else {
        return Ok(None);
    };
    let [m1, m2, m3] = header.dims();
    let flat = read_f64s(&hdr.with_file_name(name), 2 * m1 * m2 * m3)?;
    let values = flat.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    Ok(Some(Array3::from_shape_vec((m1, m2, m3), values).expect("length checked")))
}

fn read_f64s(path: &Path, count: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(CliError::file(path))?;
    if bytes.len() != 8 * count {
        return Err(CliError::Field(format!(
            "{}: expected {} bytes, found {}",
            path.display(),
            8 * count,
            bytes.len()
        )));
    }
    Ok(bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect())
}

/// Legacy VTK, binary (big-endian). Equispaced grids become
/// `STRUCTURED_POINTS`, others `RECTILINEAR_GRID`. VTK orders points with the
/// first axis fastest, the reverse of the raw payload.
pub fn write_vtk(path: &Path, axes: &[Vec<f64>; 3], rho: &Array3<f64>, time: f64) -> Result<()> {
    let io = CliError::file(path);
    let mut w = create(path)?;
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        let [m1, m2, m3] = [axes[0].len(), axes[1].len(), axes[2].len()];
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "density |psi|^2 at t = {time}")?;
        writeln!(w, "BINARY")?;
        if axes.iter().all(|a| is_equispaced(a)) {
            let step = |a: &Vec<f64>| if a.len() > 1 { (a[a.len() - 1] - a[0]) / (a.len() - 1) as f64 } else { 1.0 };
            writeln!(w, "DATASET STRUCTURED_POINTS")?;
            writeln!(w, "DIMENSIONS {m1} {m2} {m3}")?;
            writeln!(w, "ORIGIN {} {} {}", first(&axes[0]), first(&axes[1]), first(&axes[2]))?;
            writeln!(w, "SPACING {} {} {}", step(&axes[0]), step(&axes[1]), step(&axes[2]))?;
        } else {
            writeln!(w, "DATASET RECTILINEAR_GRID")?;
            writeln!(w, "DIMENSIONS {m1} {m2} {m3}")?;
            for (name, axis) in ["X", "Y", "Z"].iter().zip(axes) {
                writeln!(w, "{name}_COORDINATES {} double", axis.len())?;
                for v in axis {
                    w.write_all(&v.to_be_bytes())?;
                }
                writeln!(w)?;
            }
        }
        writeln!(w, "POINT_DATA {}", m1 * m2 * m3)?;
        writeln!(w, "SCALARS rho double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for k in 0..m3 {
            for j in 0..m2 {
                for i in 0..m1 {
                    w.write_all(&rho[[i, j, k]].to_be_bytes())?;
                }
            }
        }
        writeln!(w)?;
        w.flush()
    };
    write(&mut w).map_err(io)
}

fn first(axis: &[f64]) -> f64 {
    axis.first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fourier3::fourier::DomainBox;

    #[test]
    fn header_round_trips() {
        let h = FieldHeader {
            time: 0.1 + 0.2,
            axes: [vec![0.0, 0.5, 1.0], vec![-1.0 / 3.0, 2.0], vec![7.0]],
            rho: "f.raw".into(),
            psi: Some("f.psi.raw".into()),
        };
        assert_eq!(FieldHeader::parse(&h.render()).unwrap(), h);
        let bad = h.render().replace("dims = 3 2 1", "dims = 3 2 2");
        assert!(FieldHeader::parse(&bad).is_err());
    }

    #[test]
    fn writes_and_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let domain = DomainBox::cube(0.0, 2.0).unwrap();
        let mut spec = SpectralField::zeros(domain, fourier3::fourier::GridSize::cube(4).unwrap());
        *spec.mode_mut([0, 0, 0]) = Complex64::new(8f64.sqrt(), 0.0);
        *spec.mode_mut([1, 0, 0]) = Complex64::new(0.0, 0.5);
        let grid = RectilinearGrid::new([vec![0.0, 0.3, 1.9], vec![0.5, 1.0], vec![0.25, 1.25, 1.5, 1.75]]);
        let prefix = dir.path().join("f");
        let options = FieldOptions {
            complex: true,
            vtk: true,
            count_below: Some(2.0),
        };
        let stats = write_grid_field(&spec, &grid, 1.5, &prefix, options).unwrap();
        assert_eq!(stats.points, 24);
        let (header, rho) = read_field(&dir.path().join("f.hdr")).unwrap();
        assert_eq!(header.time, 1.5);
        let psi = read_psi(&dir.path().join("f.hdr"), &header).unwrap().unwrap();
        let exact = fourier3::rectilinear::eval_rectilinear(&spec, &grid).unwrap();
        assert_eq!(psi, exact);
        assert_eq!(rho, exact.mapv(|v| v.norm_sqr()));
        assert_eq!(stats.below, Some(rho.iter().filter(|&&r| r <= 2.0).count()));
        let vtk = std::fs::read(dir.path().join("f.vtk")).unwrap();
        assert!(vtk.starts_with(b"# vtk DataFile Version 3.0\n"));
        assert!(vtk.windows(16).any(|w| w == b"RECTILINEAR_GRID"));
    }

    #[test]
    fn outside_grid_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SpectralField::zeros(DomainBox::unit(), fourier3::fourier::GridSize::cube(2).unwrap());
        let grid = RectilinearGrid::new([vec![0.5], vec![1.0], vec![0.5]]);
        let err = write_grid_field(&spec, &grid, 0.0, &dir.path().join("g"), FieldOptions::default()).unwrap_err();
        assert_eq!(err.code(), "outside-domain");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
