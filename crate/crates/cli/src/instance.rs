//! Plain-text instance files.
//!
//! ```text
//! n p s sigma seed
//! <n lines of p design entries>
//! <s index:value pairs>
//! <n observations>
//! ```

use std::fmt::Write as _;

use suppdec::{DesignMatrix, ObservationVector, SparseSignal, SupportSet};

pub struct InstanceFile {
    pub design: DesignMatrix,
    pub signal: SparseSignal,
    pub obs: ObservationVector,
    pub seed: u64,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl InstanceFile {
    pub fn render(&self) -> String {
        let (n, p) = (self.design.n(), self.design.p());
        let mut out = format!("{n} {p} {} {} {}\n", self.signal.s(), num(self.obs.sigma), self.seed);
        for i in 0..n {
            let row: Vec<String> = (0..p).map(|j| num(self.design.get(i, j))).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        let pairs: Vec<String> = self.signal.iter().map(|(j, v)| format!("{j}:{}", num(v))).collect();
        writeln!(out, "{}", pairs.join(" ")).unwrap();
        let ys: Vec<String> = self.obs.y.iter().map(|&v| num(v)).collect();
        writeln!(out, "{}", ys.join(" ")).unwrap();
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next = |what: &str| lines.next().ok_or_else(|| format!("instance file ends before {what}"));
        let header: Vec<&str> = next("the header")?.split_whitespace().collect();
        let [n, p, s, sigma, seed] = header[..] else {
            return Err("header must be `n p s sigma seed`".into());
        };
        let int = |v: &str| v.parse::<usize>().map_err(|e| format!("bad integer `{v}`: {e}"));
        let float = |v: &str| v.parse::<f64>().map_err(|e| format!("bad number `{v}`: {e}"));
        let (n, p, s) = (int(n)?, int(p)?, int(s)?);
        let sigma = float(sigma)?;
        let seed = seed.parse::<u64>().map_err(|e| format!("bad seed `{seed}`: {e}"))?;

        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let row = next("the design rows")?
                .split_whitespace()
                .map(float)
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != p {
                return Err(format!("design row {i} has {} entries, expected {p}", row.len()));
            }
            rows.push(row);
        }
        let design = DesignMatrix::from_rows(&rows).map_err(|e| e.to_string())?;

        let mut idx = Vec::with_capacity(s);
        let mut vals = Vec::with_capacity(s);
        for pair in next("the signal line")?.split_whitespace() {
            let (j, v) = pair.split_once(':').ok_or_else(|| format!("bad signal entry `{pair}`"))?;
            idx.push(int(j)?);
            vals.push(float(v)?);
        }
        if idx.len() != s {
            return Err(format!("signal has {} entries, expected {s}", idx.len()));
        }
        let support = SupportSet::new(idx, p).map_err(|e| e.to_string())?;
        let signal = SparseSignal::new(p, support, vals).map_err(|e| e.to_string())?;

        let y = next("the observations")?
            .split_whitespace()
            .map(float)
            .collect::<Result<Vec<_>, _>>()?;
        if y.len() != n {
            return Err(format!("{} observations, expected {n}", y.len()));
        }
        Ok(Self {
            design,
            signal,
            obs: ObservationVector { y, sigma },
            seed,
        })
    }
}
