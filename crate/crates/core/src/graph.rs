//! Directed weighted graphs with per-vertex category sets.
//!
//! Vertices are dense ids in `0..vertex_count`. Input files may use any
//! token as a vertex name; [`VertexNames`] keeps the mapping back to the
//! original ids.

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::{
    expect_magic, expect_version, get_str, get_u32, get_u64, put_str, put_u32, put_u64,
};
use crate::error::{Error, Result};
use crate::{CategoryId, Cost, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub head: VertexId,
    pub weight: Cost,
}

/// Compressed adjacency in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    directed: bool,
    out_offsets: Vec<usize>,
    out_arcs: Vec<Arc>,
    in_offsets: Vec<usize>,
    in_arcs: Vec<Arc>,
}

fn compress(n: usize, arcs: &[(VertexId, VertexId, Cost)]) -> (Vec<usize>, Vec<Arc>) {
    let mut offsets = vec![0usize; n + 1];
    for &(u, _, _) in arcs {
        offsets[u as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut out = vec![Arc { head: 0, weight: 0 }; arcs.len()];
    for &(u, v, w) in arcs {
        out[fill[u as usize]] = Arc { head: v, weight: w };
        fill[u as usize] += 1;
    }
    for v in 0..n {
        out[offsets[v]..offsets[v + 1]].sort_unstable();
    }
    (offsets, out)
}

impl Graph {
    /// Builds a graph from `(tail, head, weight)` triples. Undirected input is
    /// expanded into two opposite arcs per record.
    pub fn from_arcs(
        vertex_count: usize,
        arcs: impl IntoIterator<Item = (VertexId, VertexId, Cost)>,
        directed: bool,
    ) -> Result<Self> {
        let mut forward = Vec::new();
        for (u, v, w) in arcs {
            for x in [u, v] {
                if x as usize >= vertex_count {
                    return Err(Error::InvalidVertex(x));
                }
            }
            forward.push((u, v, w));
            if !directed {
                forward.push((v, u, w));
            }
        }
        let reverse: Vec<_> = forward.iter().map(|&(u, v, w)| (v, u, w)).collect();
        let (out_offsets, out_arcs) = compress(vertex_count, &forward);
        let (in_offsets, in_arcs) = compress(vertex_count, &reverse);
        Ok(Graph {
            directed,
            out_offsets,
            out_arcs,
            in_offsets,
            in_arcs,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.out_offsets.len() - 1
    }

    pub fn arc_count(&self) -> usize {
        self.out_arcs.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn out_arcs(&self, v: VertexId) -> &[Arc] {
        let v = v as usize;
        &self.out_arcs[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn in_arcs(&self, v: VertexId) -> &[Arc] {
        let v = v as usize;
        &self.in_arcs[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.out_arcs(v).len() + self.in_arcs(v).len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        (v as usize) < self.vertex_count()
    }

    /// Cheapest arc weight from `u` to `v`, if any arc exists.
    pub fn arc_weight(&self, u: VertexId, v: VertexId) -> Option<Cost> {
        self.out_arcs(u)
            .iter()
            .filter(|a| a.head == v)
            .map(|a| a.weight)
            .min()
    }

    /// Iterates over every stored arc as `(tail, head, weight)`.
    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId, Cost)> + '_ {
        (0..self.vertex_count() as VertexId)
            .flat_map(move |u| self.out_arcs(u).iter().map(move |a| (u, a.head, a.weight)))
    }

    const MAGIC: [u8; 8] = *b"KOSRGRF\0";
    const VERSION: u32 = 1;

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&Self::MAGIC)?;
        put_u32(w, Self::VERSION)?;
        put_u32(w, self.vertex_count() as u32)?;
        put_u32(w, self.directed as u32)?;
        put_u64(w, self.out_arcs.len() as u64)?;
        for (u, v, c) in self.arcs() {
            put_u32(w, u)?;
            put_u32(w, v)?;
            put_u64(w, c)?;
        }
        Ok(())
    }

    /// Reads a graph written by [`Graph::write_to`]. Arcs are stored already
    /// expanded, so the result is rebuilt as directed and then tagged.
    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        expect_magic(r, &Self::MAGIC)?;
        expect_version(r, Self::VERSION)?;
        let n = get_u32(r)? as usize;
        let directed = get_u32(r)? != 0;
        let m = get_u64(r)? as usize;
        let mut arcs = Vec::with_capacity(m);
        for _ in 0..m {
            arcs.push((get_u32(r)?, get_u32(r)?, get_u64(r)?));
        }
        let mut g = Graph::from_arcs(n, arcs, true)?;
        g.directed = directed;
        Ok(g)
    }
}

/// Dense id ↔ original vertex name table produced at load time.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VertexNames {
    names: Vec<String>,
    ids: HashMap<String, VertexId>,
}

impl VertexNames {
    pub fn new() -> Self {
        Self::default()
    }

    /// Names `0..n` by their decimal id.
    pub fn identity(n: usize) -> Self {
        let mut names = Self::new();
        for i in 0..n {
            names.intern(&i.to_string());
        }
        names
    }

    pub fn intern(&mut self, name: &str) -> VertexId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as VertexId;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<VertexId> {
        self.ids.get(name).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<VertexId> {
        self.id(name)
            .ok_or_else(|| Error::UnknownVertexName(name.to_string()))
    }

    pub fn name(&self, id: VertexId) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        put_u32(w, self.names.len() as u32)?;
        for n in &self.names {
            put_str(w, n)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let n = get_u32(r)?;
        let mut names = Self::new();
        for _ in 0..n {
            names.intern(&get_str(r)?);
        }
        Ok(names)
    }
}

fn parse_weight(token: &str, line: usize) -> Result<Cost> {
    let w: i64 = token.parse().map_err(|_| Error::Malformed {
        line,
        reason: format!("weight `{token}` is not an integer"),
    })?;
    if w < 0 {
        return Err(Error::NegativeWeight { line, weight: w });
    }
    Ok(w as Cost)
}

/// Parses an edge list.
///
/// Accepted lines: `u v w` records, DIMACS `a u v w` arcs, DIMACS `p ...`
/// headers (ignored), blank lines, and comments starting with `#`. A line
/// whose first token is `c` is a DIMACS comment unless it is itself a
/// well-formed three-token record.
pub fn load_graph(source: impl BufRead, directed: bool) -> Result<(Graph, VertexNames)> {
    let mut names = VertexNames::new();
    let mut arcs = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let record = match tokens.as_slice() {
            ["p", ..] => continue,
            ["a", u, v, w] => (*u, *v, *w),
            [u, v, w] if *u != "c" || w.parse::<i64>().is_ok() => (*u, *v, *w),
            ["c", ..] => continue,
            _ => {
                return Err(Error::Malformed {
                    line: lineno,
                    reason: format!("expected `u v w`, found {} tokens", tokens.len()),
                })
            }
        };
        let weight = parse_weight(record.2, lineno)?;
        let u = names.intern(record.0);
        let v = names.intern(record.1);
        arcs.push((u, v, weight));
    }
    let g = Graph::from_arcs(names.len(), arcs, directed)?;
    Ok((g, names))
}

/// Category membership: `members[c]` is sorted and duplicate free, and
/// `vertex_categories[v]` lists the categories of `v` in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryMap {
    names: Vec<String>,
    members: Vec<Vec<VertexId>>,
    vertex_categories: Vec<Vec<CategoryId>>,
}

impl CategoryMap {
    pub fn new(vertex_count: usize) -> Self {
        CategoryMap {
            names: Vec::new(),
            members: Vec::new(),
            vertex_categories: vec![Vec::new(); vertex_count],
        }
    }

    /// Returns the id of `name`, creating an empty category if needed.
    pub fn add_category(&mut self, name: &str) -> CategoryId {
        if let Some(id) = self.id(name) {
            return id;
        }
        self.names.push(name.to_string());
        self.members.push(Vec::new());
        (self.names.len() - 1) as CategoryId
    }

    pub fn id(&self, name: &str) -> Option<CategoryId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as CategoryId)
    }

    pub fn resolve(&self, name: &str) -> Result<CategoryId> {
        self.id(name)
            .ok_or_else(|| Error::UnknownCategoryName(name.to_string()))
    }

    pub fn name(&self, c: CategoryId) -> &str {
        &self.names[c as usize]
    }

    pub fn category_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_categories.len()
    }

    pub fn check(&self, c: CategoryId) -> Result<()> {
        if (c as usize) < self.names.len() {
            Ok(())
        } else {
            Err(Error::UnknownCategory(c))
        }
    }

    pub fn members(&self, c: CategoryId) -> &[VertexId] {
        &self.members[c as usize]
    }

    pub fn size(&self, c: CategoryId) -> usize {
        self.members[c as usize].len()
    }

    pub fn categories_of(&self, v: VertexId) -> &[CategoryId] {
        &self.vertex_categories[v as usize]
    }

    pub fn contains(&self, c: CategoryId, v: VertexId) -> bool {
        self.members[c as usize].binary_search(&v).is_ok()
    }

    /// Adds `v` to `c`. Returns false if it was already a member.
    pub fn insert(&mut self, v: VertexId, c: CategoryId) -> Result<bool> {
        self.check(c)?;
        if v as usize >= self.vertex_categories.len() {
            return Err(Error::InvalidVertex(v));
        }
        let members = &mut self.members[c as usize];
        match members.binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                members.insert(pos, v);
                let cats = &mut self.vertex_categories[v as usize];
                let at = cats.binary_search(&c).unwrap_err();
                cats.insert(at, c);
                Ok(true)
            }
        }
    }

    /// Removes `v` from `c`. Returns false if it was not a member.
    pub fn remove(&mut self, v: VertexId, c: CategoryId) -> Result<bool> {
        self.check(c)?;
        if v as usize >= self.vertex_categories.len() {
            return Err(Error::InvalidVertex(v));
        }
        let members = &mut self.members[c as usize];
        match members.binary_search(&v) {
            Err(_) => Ok(false),
            Ok(pos) => {
                members.remove(pos);
                let cats = &mut self.vertex_categories[v as usize];
                if let Ok(at) = cats.binary_search(&c) {
                    cats.remove(at);
                }
                Ok(true)
            }
        }
    }

    /// Builds a map from explicit member lists, one category per entry.
    pub fn from_members(vertex_count: usize, categories: &[(&str, Vec<VertexId>)]) -> Result<Self> {
        let mut cm = CategoryMap::new(vertex_count);
        for (name, vs) in categories {
            let c = cm.add_category(name);
            for &v in vs {
                cm.insert(v, c)?;
            }
        }
        Ok(cm)
    }

    const MAGIC: [u8; 8] = *b"KOSRCAT\0";
    const VERSION: u32 = 1;

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&Self::MAGIC)?;
        put_u32(w, Self::VERSION)?;
        put_u32(w, self.vertex_count() as u32)?;
        put_u32(w, self.names.len() as u32)?;
        for (name, members) in self.names.iter().zip(&self.members) {
            put_str(w, name)?;
            put_u32(w, members.len() as u32)?;
            for &v in members {
                put_u32(w, v)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        expect_magic(r, &Self::MAGIC)?;
        expect_version(r, Self::VERSION)?;
        let n = get_u32(r)? as usize;
        let count = get_u32(r)?;
        let mut cm = CategoryMap::new(n);
        for _ in 0..count {
            let c = cm.add_category(&get_str(r)?);
            let len = get_u32(r)?;
            for _ in 0..len {
                cm.insert(get_u32(r)?, c)?;
            }
        }
        Ok(cm)
    }
}

/// Parses `v c` lines. Vertices are resolved through `names`; categories are
/// numbered in order of first appearance.
pub fn load_categories(source: impl BufRead, names: &VertexNames) -> Result<CategoryMap> {
    let mut cm = CategoryMap::new(names.len());
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let [v, c] = tokens.as_slice() else {
            return Err(Error::Malformed {
                line: idx + 1,
                reason: format!("expected `v c`, found {} tokens", tokens.len()),
            });
        };
        let v = names.resolve(v)?;
        let c = cm.add_category(c);
        cm.insert(v, c)?;
    }
    Ok(cm)
}

/// Writes `v c` lines using original vertex names.
pub fn write_categories(w: &mut impl Write, cm: &CategoryMap, names: &VertexNames) -> Result<()> {
    for c in 0..cm.category_count() as CategoryId {
        for &v in cm.members(c) {
            writeln!(w, "{} {}", names.name(v), cm.name(c))?;
        }
    }
    Ok(())
}

/// An ordered list of categories to visit, validated against a map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CategorySequence(Vec<CategoryId>);

impl CategorySequence {
    pub fn new(categories: Vec<CategoryId>, cm: &CategoryMap) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::EmptySequence);
        }
        for &c in &categories {
            cm.check(c)?;
        }
        Ok(CategorySequence(categories))
    }

    pub fn from_names<S: AsRef<str>>(names: &[S], cm: &CategoryMap) -> Result<Self> {
        let ids = names
            .iter()
            .map(|n| cm.resolve(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ids, cm)
    }

    pub fn as_slice(&self) -> &[CategoryId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn category_names(n: usize) -> impl Iterator<Item = String> {
    (0..n).map(|i| format!("C{i}"))
}

/// Picks `num_categories * size_per_category` distinct vertices uniformly at
/// random and deals them into categories of exactly `size_per_category`.
pub fn assign_uniform_categories(
    g: &Graph,
    num_categories: usize,
    size_per_category: usize,
    seed: u64,
) -> Result<CategoryMap> {
    let n = g.vertex_count();
    let needed = num_categories
        .checked_mul(size_per_category)
        .ok_or_else(|| Error::InvalidParameter("category count overflow".into()))?;
    if needed > n {
        return Err(Error::InsufficientVertices {
            needed,
            available: n,
        });
    }
    let mut vertices: Vec<VertexId> = (0..n as VertexId).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vertices.shuffle(&mut rng);
    let mut cm = CategoryMap::new(n);
    for (i, name) in category_names(num_categories).enumerate() {
        let c = cm.add_category(&name);
        for &v in &vertices[i * size_per_category..(i + 1) * size_per_category] {
            cm.insert(v, c)?;
        }
    }
    Ok(cm)
}

/// Category sizes for the rank-power law: the rank-`i` category gets a share
/// proportional to `i^(-1/f)`, every size is at least one and the sizes sum
/// to `total`.
pub fn zipf_sizes(total: usize, num_categories: usize, factor_f: f64) -> Result<Vec<usize>> {
    if num_categories == 0 {
        return Err(Error::InvalidParameter("need at least one category".into()));
    }
    if factor_f.is_nan() || factor_f < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "factor f must be >= 1, got {factor_f}"
        )));
    }
    if total < num_categories {
        return Err(Error::InsufficientVertices {
            needed: num_categories,
            available: total,
        });
    }
    let weights: Vec<f64> = (1..=num_categories)
        .map(|i| (i as f64).powf(-1.0 / factor_f))
        .collect();
    let sum: f64 = weights.iter().sum();
    // One vertex is reserved per category; the rest is split by largest remainder.
    let spare = total - num_categories;
    let raw: Vec<f64> = weights.iter().map(|w| w / sum * spare as f64).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|x| 1 + x.floor() as usize).collect();
    let mut left = total - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..num_categories).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    Ok(sizes)
}

/// Gives every vertex exactly one category with skewed, rank-power-law sizes.
pub fn assign_zipf_categories(
    g: &Graph,
    num_categories: usize,
    factor_f: f64,
    seed: u64,
) -> Result<CategoryMap> {
    let n = g.vertex_count();
    let sizes = zipf_sizes(n, num_categories, factor_f)?;
    let mut vertices: Vec<VertexId> = (0..n as VertexId).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vertices.shuffle(&mut rng);
    let mut cm = CategoryMap::new(n);
    let mut start = 0;
    for (name, size) in category_names(num_categories).zip(sizes) {
        let c = cm.add_category(&name);
        for &v in &vertices[start..start + size] {
            cm.insert(v, c)?;
        }
        start += size;
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<(Graph, VertexNames)> {
        load_graph(text.as_bytes(), true)
    }

    #[test]
    fn loads_three_records() {
        let (g, names) = parse("s a 8\ns c 10\na b 5\n").unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.arc_count(), 3);
        assert_eq!(
            g.arc_weight(names.resolve("s").unwrap(), names.resolve("c").unwrap()),
            Some(10)
        );
    }

    #[test]
    fn empty_stream_is_empty_graph() {
        let (g, names) = parse("").unwrap();
        assert_eq!(g.vertex_count(), 0);
        assert!(names.is_empty());
    }

    #[test]
    fn negative_weight_reports_line() {
        match parse("1 2 3\nu v -1\n") {
            Err(Error::NegativeWeight { line, weight }) => {
                assert_eq!(line, 2);
                assert_eq!(weight, -1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_records_rejected() {
        assert!(matches!(
            parse("1 2\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse("1 2 x\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(parse("1 2 1.5\n"), Err(Error::Malformed { .. })));
    }

    #[test]
    fn dimacs_lines_and_comments() {
        let text = "c 9th DIMACS challenge\np sp 3 2\na 1 2 7\na 2 3 1\n# note\n";
        let (g, names) = parse(text).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.arc_count(), 2);
        assert_eq!(names.name(0), "1");
        // a vertex literally named `c` still parses as a record
        let (g, names) = parse("c a 5\n").unwrap();
        assert_eq!(g.arc_weight(names.resolve("c").unwrap(), 1), Some(5));
    }

    #[test]
    fn undirected_expands_to_two_arcs() {
        let (g, _) = load_graph("x y 4\n".as_bytes(), false).unwrap();
        assert_eq!(g.arc_count(), 2);
        assert!(!g.is_directed());
        assert_eq!(g.arc_weight(1, 0), Some(4));
    }

    #[test]
    fn reverse_is_transpose() {
        let (g, _) = parse("0 1 3\n1 2 4\n0 1 2\n2 0 9\n2 2 1\n").unwrap();
        let mut fwd: Vec<_> = g.arcs().collect();
        let mut rev: Vec<_> = (0..g.vertex_count() as VertexId)
            .flat_map(|v| g.in_arcs(v).iter().map(move |a| (a.head, v, a.weight)))
            .collect();
        fwd.sort();
        rev.sort();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn graph_and_categories_round_trip() {
        let (g, names) = load_graph("a b 1\nb c 2\nc a 3\n".as_bytes(), false).unwrap();
        let cm = load_categories("a X\nb X\nb Y\n".as_bytes(), &names).unwrap();
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        cm.write_to(&mut buf).unwrap();
        names.write_to(&mut buf).unwrap();
        let mut r = buf.as_slice();
        assert_eq!(Graph::read_from(&mut r).unwrap(), g);
        assert_eq!(CategoryMap::read_from(&mut r).unwrap(), cm);
        assert_eq!(VertexNames::read_from(&mut r).unwrap(), names);
    }

    #[test]
    fn category_map_membership_is_consistent() {
        let (_, names) = parse("a b 1\nb c 1\n").unwrap();
        let cm = load_categories("a X\nb X\nb Y\nb Y\n".as_bytes(), &names).unwrap();
        let x = cm.resolve("X").unwrap();
        let y = cm.resolve("Y").unwrap();
        assert_eq!(cm.members(x), &[0, 1]);
        assert_eq!(cm.members(y), &[1]);
        assert_eq!(cm.categories_of(1), &[x, y]);
        assert!(load_categories("zz X\n".as_bytes(), &names).is_err());
    }

    fn line_graph(n: usize) -> Graph {
        Graph::from_arcs(
            n,
            (0..n.saturating_sub(1) as u32).map(|i| (i, i + 1, 1)),
            true,
        )
        .unwrap()
    }

    #[test]
    fn uniform_categories_have_exact_sizes() {
        let g = line_graph(100);
        let cm = assign_uniform_categories(&g, 5, 10, 7).unwrap();
        assert_eq!(cm.category_count(), 5);
        for c in 0..5 {
            assert_eq!(cm.size(c), 10);
        }
        assert!((0..100).all(|v| cm.categories_of(v).len() <= 1));
        assert_eq!(cm, assign_uniform_categories(&g, 5, 10, 7).unwrap());
        assert_ne!(cm, assign_uniform_categories(&g, 5, 10, 8).unwrap());
    }

    #[test]
    fn uniform_categories_reject_oversubscription() {
        let g = line_graph(100);
        assert!(matches!(
            assign_uniform_categories(&g, 5, 30, 7),
            Err(Error::InsufficientVertices {
                needed: 150,
                available: 100
            })
        ));
    }

    #[test]
    fn zipf_single_category_takes_everything() {
        let g = line_graph(37);
        let cm = assign_zipf_categories(&g, 1, 1.2, 3).unwrap();
        assert_eq!(cm.size(0), 37);
    }

    #[test]
    fn zipf_skew_shrinks_with_factor() {
        let g = line_graph(10_000);
        let ratio = |f: f64| {
            let cm = assign_zipf_categories(&g, 100, f, 11).unwrap();
            let sizes: Vec<usize> = (0..100).map(|c| cm.size(c)).collect();
            assert_eq!(sizes.iter().sum::<usize>(), 10_000);
            assert!((0..10_000).all(|v| cm.categories_of(v).len() == 1));
            *sizes.iter().max().unwrap() as f64 / *sizes.iter().min().unwrap() as f64
        };
        let skewed = ratio(1.2);
        let flat = ratio(2.0);
        // 100^(1/1.2) ≈ 46.4 and 100^(1/2) = 10 before rounding
        assert!((skewed - 46.4).abs() < 1.5, "{skewed}");
        assert!((flat - 10.0).abs() < 0.5, "{flat}");
        assert!(flat < skewed);
    }

    #[test]
    fn zipf_rejects_bad_parameters() {
        assert!(zipf_sizes(10, 0, 1.5).is_err());
        assert!(zipf_sizes(10, 3, 0.5).is_err());
        assert!(zipf_sizes(2, 3, 1.5).is_err());
        assert_eq!(zipf_sizes(3, 3, 1.5).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn sequence_validation() {
        let cm = CategoryMap::from_members(3, &[("A", vec![0])]).unwrap();
        assert!(matches!(
            CategorySequence::new(vec![], &cm),
            Err(Error::EmptySequence)
        ));
        assert!(matches!(
            CategorySequence::new(vec![1], &cm),
            Err(Error::UnknownCategory(1))
        ));
        assert!(CategorySequence::from_names(&["A", "A"], &cm).is_ok());
        assert!(CategorySequence::from_names(&["B"], &cm).is_err());
    }
}
