//! Node-perspective degree distributions.
//!
//! Text format: `(degree, fraction)` pairs, one per line, grouped under a
//! `[variable]` and a `[check]` header. `#` starts a comment.
//!
//! ```text
//! [variable]
//! 2 0.25
//! 3 0.75
//! [check]
//! 11 1.0
//! ```

use std::fmt::Write as _;

use super::LdpcError;

const SUM_TOLERANCE: f64 = 1e-6;

/// Fractions of variable and check nodes per degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    variable: Vec<(usize, f64)>,
    check: Vec<(usize, f64)>,
}

impl DegreeDistribution {
    /// Validates and normalises the two node-perspective lists.
    pub fn new(variable: Vec<(usize, f64)>, check: Vec<(usize, f64)>) -> Result<Self, LdpcError> {
        let variable = normalise("variable", variable)?;
        let check = normalise("check", check)?;
        if variable.iter().any(|&(d, _)| d < 2) {
            return Err(LdpcError::Distribution(
                "variable degrees below 2 are not supported".into(),
            ));
        }
        Ok(Self { variable, check })
    }

    /// Regular `(dv, dc)` ensemble.
    pub fn regular(dv: usize, dc: usize) -> Result<Self, LdpcError> {
        Self::new(vec![(dv, 1.0)], vec![(dc, 1.0)])
    }

    /// Converts edge-perspective coefficients `lambda_i`, `rho_j` (fraction of
    /// edges attached to degree-`i` nodes) to node perspective.
    pub fn from_edge_perspective(lambda: &[(usize, f64)], rho: &[(usize, f64)]) -> Result<Self, LdpcError> {
        Self::new(edge_to_node(lambda), edge_to_node(rho))
    }

    pub fn variable(&self) -> &[(usize, f64)] {
        &self.variable
    }

    pub fn check(&self) -> &[(usize, f64)] {
        &self.check
    }

    pub fn mean_variable_degree(&self) -> f64 {
        self.variable.iter().map(|&(d, f)| d as f64 * f).sum()
    }

    pub fn mean_check_degree(&self) -> f64 {
        self.check.iter().map(|&(d, f)| d as f64 * f).sum()
    }

    pub fn max_variable_degree(&self) -> usize {
        self.variable.iter().map(|&(d, _)| d).max().unwrap_or(0)
    }

    /// `1 - mean_dv / mean_dc`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.mean_variable_degree() / self.mean_check_degree()
    }

    /// Edge-perspective variable coefficients `lambda_i`.
    pub fn lambda(&self) -> Vec<(usize, f64)> {
        node_to_edge(&self.variable)
    }

    /// Edge-perspective check coefficients `rho_j`.
    pub fn rho(&self) -> Vec<(usize, f64)> {
        node_to_edge(&self.check)
    }

    /// Integer column counts per degree for a block of `n` columns.
    ///
    /// Uses largest-remainder rounding so the counts sum to exactly `n`;
    /// ties go to the lower degree.
    pub fn column_counts(&self, n: usize) -> Vec<(usize, usize)> {
        largest_remainder(&self.variable, n)
    }

    /// Number of rows for a block of `n` columns: the edge count implied by
    /// [`Self::column_counts`] divided by the mean check degree, rounded.
    pub fn row_count(&self, n: usize) -> usize {
        let edges: usize = self.column_counts(n).iter().map(|&(d, c)| d * c).sum();
        (edges as f64 / self.mean_check_degree()).round().max(1.0) as usize
    }

    pub fn parse(text: &str) -> Result<Self, LdpcError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Variable,
            Check,
        }
        let mut section = Section::None;
        let (mut var, mut chk) = (Vec::new(), Vec::new());
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[variable]" => section = Section::Variable,
                "[check]" => section = Section::Check,
                _ => {
                    let mut it = line.split_whitespace();
                    let (Some(d), Some(f), None) = (it.next(), it.next(), it.next()) else {
                        return Err(LdpcError::Distribution(format!(
                            "line {}: expected 'degree fraction'",
                            lineno + 1
                        )));
                    };
                    let bad = || LdpcError::Distribution(format!("line {}: bad number", lineno + 1));
                    let pair = (d.parse().map_err(|_| bad())?, f.parse().map_err(|_| bad())?);
                    match section {
                        Section::Variable => var.push(pair),
                        Section::Check => chk.push(pair),
                        Section::None => {
                            return Err(LdpcError::Distribution(format!(
                                "line {}: pair outside a section",
                                lineno + 1
                            )))
                        }
                    }
                }
            }
        }
        Self::new(var, chk)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# node-perspective degree distribution\n[variable]\n");
        for &(d, f) in &self.variable {
            let _ = writeln!(s, "{d} {f:.10}");
        }
        s.push_str("[check]\n");
        for &(d, f) in &self.check {
            let _ = writeln!(s, "{d} {f:.10}");
        }
        s
    }
}

fn normalise(what: &str, mut pairs: Vec<(usize, f64)>) -> Result<Vec<(usize, f64)>, LdpcError> {
    if pairs.is_empty() {
        return Err(LdpcError::Distribution(format!("empty {what} distribution")));
    }
    if pairs.iter().any(|&(d, f)| d == 0 || !(0.0..=1.0).contains(&f)) {
        return Err(LdpcError::Distribution(format!(
            "{what} distribution has a zero degree or a fraction outside [0, 1]"
        )));
    }
    let sum: f64 = pairs.iter().map(|p| p.1).sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(LdpcError::Distribution(format!("{what} fractions sum to {sum}, not 1")));
    }
    pairs.retain(|p| p.1 > 0.0);
    pairs.sort_by_key(|p| p.0);
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(LdpcError::Distribution(format!(
                "{what} degree {} listed twice",
                w[0].0
            )));
        }
    }
    pairs.iter_mut().for_each(|p| p.1 /= sum);
    Ok(pairs)
}

fn edge_to_node(edge: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let total: f64 = edge.iter().map(|&(d, f)| f / d as f64).sum();
    edge.iter().map(|&(d, f)| (d, f / d as f64 / total)).collect()
}

fn node_to_edge(node: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let total: f64 = node.iter().map(|&(d, f)| f * d as f64).sum();
    node.iter().map(|&(d, f)| (d, f * d as f64 / total)).collect()
}

fn largest_remainder(fracs: &[(usize, f64)], n: usize) -> Vec<(usize, usize)> {
    let mut counts: Vec<(usize, usize, f64)> = fracs
        .iter()
        .map(|&(d, f)| {
            let exact = f * n as f64;
            (d, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let assigned: usize = counts.iter().map(|c| c.1).sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].2.total_cmp(&counts[a].2).then(a.cmp(&b)));
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i].1 += 1;
    }
    counts.into_iter().map(|(d, c, _)| (d, c)).filter(|c| c.1 > 0).collect()
}
