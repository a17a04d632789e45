//! Binary fixture exchange for channels and beamformers.
//!
//! All integers are `u64` and all floats `f64`, little-endian. Complex entries are
//! interleaved `re, im` in row-major order.
//!
//! Channel file: magic `FDBFCH01`, `n_rx`, `n_tx`, `L`, `K`, then `L` taps.
//! Beamformer file: magic `FDBFBF01`, `K`, then the `f_ue`, `w_bs`, `f_bs`, `w_ue`
//! groups, each as `K` matrices prefixed by `rows`, `cols`.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::beamforming::DigitalBeamformerSet;
use crate::channel::TimeDomainChannel;
use crate::error::{Error, Result};
use crate::numerics::CMatrix;

pub const CHANNEL_MAGIC: &[u8; 8] = b"FDBFCH01";
pub const BEAMFORMER_MAGIC: &[u8; 8] = b"FDBFBF01";

// guards allocations when reading untrusted headers
const MAX_DIM: u64 = 1 << 16;

fn put_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_dim(r: &mut impl Read, what: &str) -> Result<usize> {
    let v = get_u64(r)?;
    if v == 0 || v > MAX_DIM {
        return Err(Error::Format(format!("{what} = {v} out of range")));
    }
    Ok(v as usize)
}

fn put_entries(w: &mut impl Write, m: &CMatrix) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn get_entries(r: &mut impl Read, rows: usize, cols: usize) -> Result<CMatrix> {
    let mut m = CMatrix::zeros(rows, cols);
    let mut b = [0u8; 16];
    for i in 0..rows {
        for j in 0..cols {
            r.read_exact(&mut b)?;
            let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

fn expect_magic(r: &mut impl Read, magic: &[u8; 8]) -> Result<()> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    if &b != magic {
        return Err(Error::Format(format!("bad magic {:?}", String::from_utf8_lossy(&b))));
    }
    Ok(())
}

pub fn write_channel(w: &mut impl Write, ch: &TimeDomainChannel, n_subcarriers: usize) -> Result<()> {
    let (rx, tx) = (ch.n_rx(), ch.n_tx());
    if ch.taps.iter().any(|t| t.shape() != (rx, tx)) {
        return Err(Error::dim("write_channel", "taps differ in shape"));
    }
    w.write_all(CHANNEL_MAGIC)?;
    for v in [rx, tx, ch.taps.len(), n_subcarriers] {
        put_u64(w, v as u64)?;
    }
    for t in &ch.taps {
        put_entries(w, t)?;
    }
    Ok(())
}

/// Returns the channel and its subcarrier count `K`.
pub fn read_channel(r: &mut impl Read) -> Result<(TimeDomainChannel, usize)> {
    expect_magic(r, CHANNEL_MAGIC)?;
    let rx = get_dim(r, "n_rx")?;
    let tx = get_dim(r, "n_tx")?;
    let l = get_dim(r, "L")?;
    let k = get_dim(r, "K")?;
    if l > k {
        return Err(Error::Format(format!("L = {l} exceeds K = {k}")));
    }
    let taps = (0..l).map(|_| get_entries(r, rx, tx)).collect::<Result<Vec<_>>>()?;
    Ok((TimeDomainChannel { taps }, k))
}

pub fn write_beamformers(w: &mut impl Write, set: &DigitalBeamformerSet) -> Result<()> {
    let kk = set.f_ue.len();
    let groups = [&set.f_ue, &set.w_bs, &set.f_bs, &set.w_ue];
    if groups.iter().any(|g| g.len() != kk) {
        return Err(Error::dim("write_beamformers", "groups differ in subcarrier count"));
    }
    w.write_all(BEAMFORMER_MAGIC)?;
    put_u64(w, kk as u64)?;
    for g in groups {
        for m in g {
            put_u64(w, m.nrows() as u64)?;
            put_u64(w, m.ncols() as u64)?;
            put_entries(w, m)?;
        }
    }
    Ok(())
}

pub fn read_beamformers(r: &mut impl Read) -> Result<DigitalBeamformerSet> {
    expect_magic(r, BEAMFORMER_MAGIC)?;
    let kk = get_dim(r, "K")?;
    let mut group = || -> Result<Vec<CMatrix>> {
        (0..kk)
            .map(|_| {
                let rows = get_dim(r, "rows")?;
                let cols = get_dim(r, "cols")?;
                get_entries(r, rows, cols)
            })
            .collect()
    };
    Ok(DigitalBeamformerSet { f_ue: group()?, w_bs: group()?, f_bs: group()?, w_ue: group()? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_gaussian(m: usize, n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(m, n, |_, _| Complex64::new(rng.random(), rng.random()))
    }

    #[test]
    fn channel_round_trip_and_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = TimeDomainChannel { taps: (0..3).map(|_| random_gaussian(2, 3, &mut rng)).collect() };
        let mut buf = Vec::new();
        write_channel(&mut buf, &ch, 8).unwrap();
        assert_eq!(buf.len(), 8 + 4 * 8 + 3 * 2 * 3 * 16);
        assert_eq!(&buf[..8], b"FDBFCH01");
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 2);
        // first entry of tap 0, real part
        assert_eq!(f64::from_le_bytes(buf[40..48].try_into().unwrap()), ch.taps[0][(0, 0)].re);
        // second entry is (0, 1): row-major
        assert_eq!(f64::from_le_bytes(buf[56..64].try_into().unwrap()), ch.taps[0][(0, 1)].re);
        let (back, k) = read_channel(&mut buf.as_slice()).unwrap();
        assert_eq!(k, 8);
        assert_eq!(back, ch);
    }

    #[test]
    fn beamformer_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut g = |r, c| (0..2).map(|_| random_gaussian(r, c, &mut rng)).collect::<Vec<_>>();
        let set = DigitalBeamformerSet { f_ue: g(4, 2), w_bs: g(8, 2), f_bs: g(8, 2), w_ue: g(4, 2) };
        let mut buf = Vec::new();
        write_beamformers(&mut buf, &set).unwrap();
        assert_eq!(read_beamformers(&mut buf.as_slice()).unwrap(), set);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(read_channel(&mut &b"FDBFBF01"[..]), Err(Error::Format(_))));
        let mut buf = Vec::new();
        buf.extend_from_slice(CHANNEL_MAGIC);
        for v in [2u64, 2, 5, 4] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        assert!(matches!(read_channel(&mut buf.as_slice()), Err(Error::Format(_))));
        // truncated payload
        let mut buf = Vec::new();
        buf.extend_from_slice(CHANNEL_MAGIC);
        for v in [2u64, 2, 1, 4] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        assert!(matches!(read_channel(&mut buf.as_slice()), Err(Error::Io(_))));
    }
}
