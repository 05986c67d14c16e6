//! Index directory layout and the disk-backed query view.
//!
//! ```text
//! graph.bin        graph arcs
//! names.bin        vertex names
//! labels.bin       complete 2-hop label index
//! manifest.bin     offsets into the current payload, plus checksums
//! index.<gen>.bin  payload: one segment per category, then L_out and L_in
//! index.lock       present while a writer holds the directory
//! ```
//!
//! A category segment holds the category's inverted index, its member list
//! and the out-label of every member, so a query touches the manifest, one
//! segment per queried category, `L_out(s)` and `L_in(t)` and nothing else.
//! Writers publish a new payload generation and then atomically replace the
//! manifest; an interrupted write leaves the previous manifest in force.

use std::collections::{BTreeSet, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::codec::{
    expect_magic, expect_version, get_str, get_u32, get_u64, put_str, put_u32, put_u64,
};
use crate::error::{Error, Result};
use crate::graph::{CategoryMap, Graph, VertexNames};
use crate::index::KosrIndex;
use crate::inverted::{CategoryInvertedIndex, CategoryLookup, InvertedLabelIndex};
use crate::labeling::{read_label, write_label, LabelEntry, LabelIndex, LabelLookup};
use crate::{CategoryId, VertexId};

/// Environment variable naming the default index directory.
pub const INDEX_DIR_ENV: &str = "KOSR_INDEX_DIR";

const GRAPH_FILE: &str = "graph.bin";
const NAMES_FILE: &str = "names.bin";
const LABELS_FILE: &str = "labels.bin";
const MANIFEST_FILE: &str = "manifest.bin";
const LOCK_FILE: &str = "index.lock";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Span {
    pub offset: u64,
    pub length: u64,
}

impl Span {
    fn end(self) -> u64 {
        self.offset + self.length
    }

    fn write_to(self, w: &mut impl Write) -> io::Result<()> {
        put_u64(w, self.offset)?;
        put_u64(w, self.length)
    }

    fn read_from(r: &mut impl Read) -> io::Result<Self> {
        Ok(Span {
            offset: get_u64(r)?,
            length: get_u64(r)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentDescriptor {
    pub category: CategoryId,
    pub name: String,
    pub span: Span,
    pub members: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexManifest {
    pub generation: u64,
    pub vertex_count: u32,
    pub directed: bool,
    pub payload_sha256: [u8; 32],
    pub segments: Vec<SegmentDescriptor>,
    pub out_labels: Span,
    /// Empty for undirected graphs, whose in-labels are the out-labels.
    pub in_labels: Span,
    /// `vertex_count + 1` offsets into `out_labels`.
    pub out_offsets: Vec<u64>,
    pub in_offsets: Vec<u64>,
}

impl IndexManifest {
    const MAGIC: [u8; 8] = *b"KOSRMAN\0";
    const VERSION: u32 = 1;

    pub fn payload_file(&self) -> String {
        format!("index.{}.bin", self.generation)
    }

    pub fn segment(&self, c: CategoryId) -> Result<&SegmentDescriptor> {
        self.segments
            .get(c as usize)
            .ok_or(Error::UnknownCategory(c))
    }

    pub fn resolve_category(&self, name: &str) -> Result<CategoryId> {
        self.segments
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.category)
            .ok_or_else(|| Error::UnknownCategoryName(name.to_string()))
    }

    /// Body followed by its SHA-256.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let mut body = Vec::new();
        self.write_body(&mut body)?;
        w.write_all(&body)?;
        w.write_all(&Sha256::digest(&body))?;
        Ok(())
    }

    fn write_body(&self, w: &mut Vec<u8>) -> Result<()> {
        w.write_all(&Self::MAGIC)?;
        put_u32(w, Self::VERSION)?;
        put_u64(w, self.generation)?;
        put_u32(w, self.vertex_count)?;
        put_u32(w, u32::from(self.directed))?;
        w.write_all(&self.payload_sha256)?;
        put_u32(w, self.segments.len() as u32)?;
        for s in &self.segments {
            put_u32(w, s.category)?;
            put_str(w, &s.name)?;
            s.span.write_to(w)?;
            put_u32(w, s.members)?;
        }
        self.out_labels.write_to(w)?;
        self.in_labels.write_to(w)?;
        for table in [&self.out_offsets, &self.in_offsets] {
            put_u32(w, table.len() as u32)?;
            for &o in table {
                put_u64(w, o)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 32 {
            return Err(Error::Corrupt("manifest truncated".into()));
        }
        let (body, sum) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != sum {
            return Err(Error::Corrupt("manifest checksum mismatch".into()));
        }
        let r = &mut &body[..];
        expect_magic(r, &Self::MAGIC)?;
        expect_version(r, Self::VERSION)?;
        let generation = get_u64(r)?;
        let vertex_count = get_u32(r)?;
        let directed = get_u32(r)? != 0;
        let mut payload_sha256 = [0u8; 32];
        r.read_exact(&mut payload_sha256)?;
        let count = get_u32(r)?;
        let mut segments = Vec::with_capacity(count as usize);
        for _ in 0..count {
            segments.push(SegmentDescriptor {
                category: get_u32(r)?,
                name: get_str(r)?,
                span: Span::read_from(r)?,
                members: get_u32(r)?,
            });
        }
        let out_labels = Span::read_from(r)?;
        let in_labels = Span::read_from(r)?;
        let mut tables = [Vec::new(), Vec::new()];
        for table in &mut tables {
            let len = get_u32(r)?;
            for _ in 0..len {
                table.push(get_u64(r)?);
            }
        }
        let [out_offsets, in_offsets] = tables;
        let m = IndexManifest {
            generation,
            vertex_count,
            directed,
            payload_sha256,
            segments,
            out_labels,
            in_labels,
            out_offsets,
            in_offsets,
        };
        m.validate()?;
        Ok(m)
    }

    /// Segments are contiguous and in category order, offset tables are
    /// monotone and end at their segment's length.
    pub fn validate(&self) -> Result<()> {
        let corrupt = |what: &str| Err(Error::Corrupt(format!("manifest: {what}")));
        let mut at = 0;
        for (i, s) in self.segments.iter().enumerate() {
            if s.category as usize != i || s.span.offset != at {
                return corrupt("category segments out of order");
            }
            at = s.span.end();
        }
        if self.out_labels.offset != at || self.in_labels.offset != self.out_labels.end() {
            return corrupt("label segments out of order");
        }
        let n = self.vertex_count as usize;
        let tables = [
            (&self.out_offsets, self.out_labels),
            (&self.in_offsets, self.in_labels),
        ];
        for (k, (table, span)) in tables.into_iter().enumerate() {
            if k == 1 && !self.directed {
                if !table.is_empty() || span.length != 0 {
                    return corrupt("undirected index with in-labels");
                }
                continue;
            }
            if table.len() != n + 1
                || table.first() != Some(&0)
                || table.last() != Some(&span.length)
                || table.windows(2).any(|w| w[0] > w[1])
            {
                return corrupt("label offsets");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOp {
    Add,
    Remove,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildReport {
    pub label_time: Duration,
    pub total_time: Duration,
    pub avg_out_label: f64,
    pub avg_in_label: f64,
    pub label_entries: usize,
    pub categories: usize,
}

/// Label lists for a handful of vertices.
#[derive(Debug, Default)]
struct PartialLabels {
    vertex_count: usize,
    directed: bool,
    out: HashMap<VertexId, Vec<LabelEntry>>,
    inn: HashMap<VertexId, Vec<LabelEntry>>,
}

impl LabelLookup for PartialLabels {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    fn out_label(&self, v: VertexId) -> &[LabelEntry] {
        self.out.get(&v).map_or(&[], Vec::as_slice)
    }

    fn in_label(&self, v: VertexId) -> &[LabelEntry] {
        let map = if self.directed { &self.inn } else { &self.out };
        map.get(&v).map_or(&[], Vec::as_slice)
    }
}

/// The slice of an index a single query needs, read from disk.
#[derive(Debug)]
pub struct DiskView {
    labels: PartialLabels,
    inverted: HashMap<CategoryId, CategoryInvertedIndex>,
    segment_reads: usize,
}

impl DiskView {
    /// Reads performed: the manifest, each distinct queried category
    /// segment, `L_out(s)` and `L_in(t)`.
    pub fn segment_reads(&self) -> usize {
        self.segment_reads
    }
}

impl LabelLookup for DiskView {
    fn vertex_count(&self) -> usize {
        self.labels.vertex_count
    }

    fn out_label(&self, v: VertexId) -> &[LabelEntry] {
        debug_assert!(
            self.labels.out.contains_key(&v),
            "out-label of {v} not loaded"
        );
        self.labels.out_label(v)
    }

    fn in_label(&self, v: VertexId) -> &[LabelEntry] {
        self.labels.in_label(v)
    }
}

impl CategoryLookup for DiskView {
    fn inverted(&self, c: CategoryId) -> Option<&CategoryInvertedIndex> {
        self.inverted.get(&c)
    }
}

struct Segment {
    inverted: CategoryInvertedIndex,
    members: Vec<VertexId>,
    out_labels: Vec<Vec<LabelEntry>>,
}

fn encode_segment<'a>(
    inverted: &CategoryInvertedIndex,
    members: &[VertexId],
    out_label: impl Fn(VertexId) -> &'a [LabelEntry],
) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    inverted.write_to(&mut buf)?;
    put_u32(&mut buf, members.len() as u32)?;
    for &v in members {
        put_u32(&mut buf, v)?;
        write_label(&mut buf, out_label(v))?;
    }
    Ok(buf)
}

fn decode_segment(mut bytes: &[u8]) -> Result<Segment> {
    let r = &mut bytes;
    let inverted = CategoryInvertedIndex::read_from(r)?;
    let count = get_u32(r)? as usize;
    let mut members = Vec::with_capacity(count);
    let mut out_labels = Vec::with_capacity(count);
    for _ in 0..count {
        members.push(get_u32(r)?);
        out_labels.push(read_label(r)?);
    }
    if !r.is_empty() || members.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Corrupt("malformed category segment".into()));
    }
    Ok(Segment {
        inverted,
        members,
        out_labels,
    })
}

fn encode_labels<'a>(
    n: usize,
    label: impl Fn(VertexId) -> &'a [LabelEntry],
) -> Result<(Vec<u8>, Vec<u64>)> {
    let mut buf = Vec::new();
    let mut offsets = Vec::with_capacity(n + 1);
    for v in 0..n as VertexId {
        offsets.push(buf.len() as u64);
        write_label(&mut buf, label(v))?;
    }
    offsets.push(buf.len() as u64);
    Ok((buf, offsets))
}

struct PayloadParts<'a> {
    names: Vec<&'a str>,
    member_counts: Vec<u32>,
    segments: Vec<std::borrow::Cow<'a, [u8]>>,
    out_bytes: &'a [u8],
    out_offsets: Vec<u64>,
    in_bytes: &'a [u8],
    in_offsets: Vec<u64>,
}

fn assemble(
    parts: PayloadParts<'_>,
    generation: u64,
    vertex_count: u32,
    directed: bool,
) -> (Vec<u8>, IndexManifest) {
    let mut payload = Vec::new();
    let mut segments = Vec::with_capacity(parts.segments.len());
    for (i, bytes) in parts.segments.iter().enumerate() {
        let span = Span {
            offset: payload.len() as u64,
            length: bytes.len() as u64,
        };
        payload.extend_from_slice(bytes);
        segments.push(SegmentDescriptor {
            category: i as CategoryId,
            name: parts.names[i].to_string(),
            span,
            members: parts.member_counts[i],
        });
    }
    let out_labels = Span {
        offset: payload.len() as u64,
        length: parts.out_bytes.len() as u64,
    };
    payload.extend_from_slice(parts.out_bytes);
    let in_labels = Span {
        offset: payload.len() as u64,
        length: parts.in_bytes.len() as u64,
    };
    payload.extend_from_slice(parts.in_bytes);
    let manifest = IndexManifest {
        generation,
        vertex_count,
        directed,
        payload_sha256: Sha256::digest(&payload).into(),
        segments,
        out_labels,
        in_labels,
        out_offsets: parts.out_offsets,
        in_offsets: parts.in_offsets,
    };
    (payload, manifest)
}

fn slice(bytes: &[u8], span: Span) -> Result<&[u8]> {
    bytes
        .get(span.offset as usize..span.end() as usize)
        .ok_or_else(|| Error::Corrupt("segment beyond payload end".into()))
}

/// Writes `bytes` to `path` through a synced temporary file and a rename.
fn write_atomic(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<&File>) -> Result<()>,
) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let file = File::create(&tmp)?;
    {
        let mut w = BufWriter::new(&file);
        write(&mut w)?;
        w.flush()?;
    }
    file.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn sync_dir(dir: &Path) -> Result<()> {
    File::open(dir)?.sync_all()?;
    Ok(())
}

struct WriteLock(PathBuf);

impl WriteLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(WriteLock(path))
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                Err(Error::Locked(path.display().to_string()))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for WriteLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

#[derive(Debug, Clone)]
pub struct IndexStore {
    dir: PathBuf,
}

impl IndexStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        IndexStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Builds labels and inverted indexes and writes a fresh directory.
    pub fn build(
        dir: impl Into<PathBuf>,
        graph: Graph,
        names: VertexNames,
        categories: CategoryMap,
    ) -> Result<(IndexStore, KosrIndex, BuildReport)> {
        let start = Instant::now();
        let labels = LabelIndex::build(&graph);
        let label_time = start.elapsed();
        let inverted = InvertedLabelIndex::build(&labels, &categories);
        let index = KosrIndex {
            graph,
            names,
            categories,
            labels,
            inverted,
        };
        let store = IndexStore::new(dir);
        store.save(&index)?;
        let report = BuildReport {
            label_time,
            total_time: start.elapsed(),
            avg_out_label: index.labels.avg_out_size(),
            avg_in_label: index.labels.avg_in_size(),
            label_entries: index.labels.total_entries(),
            categories: index.categories.category_count(),
        };
        Ok((store, index, report))
    }

    /// Writes every artifact of `index` as generation 1.
    pub fn save(&self, index: &KosrIndex) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let _lock = WriteLock::acquire(&self.dir)?;
        let previous = self.read_manifest().ok();

        write_atomic(&self.dir.join(GRAPH_FILE), |w| index.graph.write_to(w))?;
        write_atomic(&self.dir.join(NAMES_FILE), |w| index.names.write_to(w))?;
        write_atomic(&self.dir.join(LABELS_FILE), |w| index.labels.write_to(w))?;

        let (labels, cm) = (&index.labels, &index.categories);
        let n = labels.vertex_count();
        let mut segments = Vec::with_capacity(cm.category_count());
        for c in 0..cm.category_count() as CategoryId {
            let inverted = index.inverted.category(c).cloned().unwrap_or_default();
            segments
                .push(encode_segment(&inverted, cm.members(c), |v| labels.out_label(v))?.into());
        }
        let (out_bytes, out_offsets) = encode_labels(n, |v| labels.out_label(v))?;
        let (in_bytes, in_offsets) = if labels.is_directed() {
            encode_labels(n, |v| labels.in_label(v))?
        } else {
            (Vec::new(), Vec::new())
        };
        let parts = PayloadParts {
            names: (0..cm.category_count() as CategoryId)
                .map(|c| cm.name(c))
                .collect(),
            member_counts: (0..cm.category_count() as CategoryId)
                .map(|c| cm.size(c) as u32)
                .collect(),
            segments,
            out_bytes: &out_bytes,
            out_offsets,
            in_bytes: &in_bytes,
            in_offsets,
        };
        let (payload, manifest) = assemble(parts, 1, n as u32, labels.is_directed());
        self.publish(&payload, &manifest, previous.as_ref())
    }

    fn publish(
        &self,
        payload: &[u8],
        manifest: &IndexManifest,
        previous: Option<&IndexManifest>,
    ) -> Result<()> {
        write_atomic(&self.dir.join(manifest.payload_file()), |w| {
            Ok(w.write_all(payload)?)
        })?;
        write_atomic(&self.dir.join(MANIFEST_FILE), |w| manifest.write_to(w))?;
        sync_dir(&self.dir)?;
        if let Some(old) = previous {
            if old.generation != manifest.generation {
                let _ = fs::remove_file(self.dir.join(old.payload_file()));
            }
        }
        Ok(())
    }

    fn ensure_unlocked(&self) -> Result<()> {
        let lock = self.dir.join(LOCK_FILE);
        if lock.exists() {
            return Err(Error::Locked(lock.display().to_string()));
        }
        Ok(())
    }

    pub fn read_manifest(&self) -> Result<IndexManifest> {
        let mut r = BufReader::new(File::open(self.dir.join(MANIFEST_FILE))?);
        IndexManifest::read_from(&mut r)
    }

    pub fn load_graph(&self) -> Result<Graph> {
        self.ensure_unlocked()?;
        Graph::read_from(&mut BufReader::new(File::open(self.dir.join(GRAPH_FILE))?))
    }

    pub fn load_names(&self) -> Result<VertexNames> {
        VertexNames::read_from(&mut BufReader::new(File::open(self.dir.join(NAMES_FILE))?))
    }

    pub fn load_labels(&self) -> Result<LabelIndex> {
        LabelIndex::read_from(&mut BufReader::new(File::open(self.dir.join(LABELS_FILE))?))
    }

    fn read_payload(&self, manifest: &IndexManifest) -> Result<Vec<u8>> {
        let payload = fs::read(self.dir.join(manifest.payload_file()))?;
        if Sha256::digest(&payload).as_slice() != manifest.payload_sha256 {
            return Err(Error::Corrupt("payload checksum mismatch".into()));
        }
        Ok(payload)
    }

    /// Category map and inverted indexes from the current payload.
    pub fn load_categories(&self) -> Result<(CategoryMap, InvertedLabelIndex)> {
        self.ensure_unlocked()?;
        let manifest = self.read_manifest()?;
        let payload = self.read_payload(&manifest)?;
        let mut cm = CategoryMap::new(manifest.vertex_count as usize);
        let mut inverted = Vec::with_capacity(manifest.segments.len());
        for s in &manifest.segments {
            let seg = decode_segment(slice(&payload, s.span)?)?;
            let c = cm.add_category(&s.name);
            for &v in &seg.members {
                cm.insert(v, c)?;
            }
            inverted.push(seg.inverted);
        }
        Ok((cm, InvertedLabelIndex::from_parts(inverted)))
    }

    /// Everything, for in-memory querying.
    pub fn load(&self) -> Result<KosrIndex> {
        let graph = self.load_graph()?;
        let names = self.load_names()?;
        let labels = self.load_labels()?;
        let (categories, inverted) = self.load_categories()?;
        if labels.vertex_count() != graph.vertex_count()
            || categories.vertex_count() != graph.vertex_count()
        {
            return Err(Error::Corrupt(
                "index files disagree on vertex count".into(),
            ));
        }
        Ok(KosrIndex {
            graph,
            names,
            categories,
            labels,
            inverted,
        })
    }

    /// Reads only what a query from `s` to `t` through `sequence` needs.
    pub fn open_query_view(
        &self,
        s: VertexId,
        t: VertexId,
        sequence: &[CategoryId],
    ) -> Result<DiskView> {
        self.ensure_unlocked()?;
        let manifest = self.read_manifest()?;
        let mut reads = 1;
        let n = manifest.vertex_count as usize;
        for v in [s, t] {
            if v as usize >= n {
                return Err(Error::InvalidVertex(v));
            }
        }
        let mut file = File::open(self.dir.join(manifest.payload_file()))?;
        let mut read_span = |span: Span| -> Result<Vec<u8>> {
            let mut buf = vec![0u8; span.length as usize];
            file.seek(SeekFrom::Start(span.offset))?;
            file.read_exact(&mut buf)?;
            Ok(buf)
        };

        let mut labels = PartialLabels {
            vertex_count: n,
            directed: manifest.directed,
            ..Default::default()
        };
        let mut inverted = HashMap::new();
        let distinct: BTreeSet<CategoryId> = sequence.iter().copied().collect();
        for c in distinct {
            let bytes = read_span(manifest.segment(c)?.span)?;
            reads += 1;
            let seg = decode_segment(&bytes)?;
            for (v, label) in seg.members.into_iter().zip(seg.out_labels) {
                labels.out.insert(v, label);
            }
            inverted.insert(c, seg.inverted);
        }

        let entry = |table: &[u64], base: Span, v: VertexId| Span {
            offset: base.offset + table[v as usize],
            length: table[v as usize + 1] - table[v as usize],
        };
        let bytes = read_span(entry(&manifest.out_offsets, manifest.out_labels, s))?;
        reads += 1;
        labels.out.insert(s, read_label(&mut bytes.as_slice())?);
        let (table, base) = if manifest.directed {
            (&manifest.in_offsets, manifest.in_labels)
        } else {
            (&manifest.out_offsets, manifest.out_labels)
        };
        let bytes = read_span(entry(table, base, t))?;
        reads += 1;
        let label = read_label(&mut bytes.as_slice())?;
        if manifest.directed {
            labels.inn.insert(t, label);
        } else {
            labels.out.entry(t).or_insert(label);
        }
        Ok(DiskView {
            labels,
            inverted,
            segment_reads: reads,
        })
    }

    /// Adds or removes one category membership, rewriting that category's
    /// segment and publishing a new generation. Returns `false` without
    /// writing anything when the membership already has the requested state.
    pub fn update(&self, op: UpdateOp, v: VertexId, c: CategoryId) -> Result<bool> {
        let _lock = WriteLock::acquire(&self.dir)?;
        let manifest = self.read_manifest()?;
        manifest.segment(c)?;
        if v >= manifest.vertex_count {
            return Err(Error::InvalidVertex(v));
        }
        let payload = self.read_payload(&manifest)?;
        let mut seg = decode_segment(slice(&payload, manifest.segments[c as usize].span)?)?;
        let pos = seg.members.binary_search(&v);
        match (op, pos) {
            (UpdateOp::Add, Ok(_)) | (UpdateOp::Remove, Err(_)) => return Ok(false),
            _ => {}
        }

        let out_bytes = slice(&payload, manifest.out_labels)?;
        let in_bytes = slice(&payload, manifest.in_labels)?;
        let label_at = |bytes: &[u8], table: &[u64]| -> Result<Vec<LabelEntry>> {
            read_label(&mut &bytes[table[v as usize] as usize..table[v as usize + 1] as usize])
        };
        let mut labels = PartialLabels {
            vertex_count: manifest.vertex_count as usize,
            directed: manifest.directed,
            ..Default::default()
        };
        labels
            .out
            .insert(v, label_at(out_bytes, &manifest.out_offsets)?);
        if manifest.directed {
            labels
                .inn
                .insert(v, label_at(in_bytes, &manifest.in_offsets)?);
        }

        match (op, pos) {
            (UpdateOp::Add, Err(at)) => {
                seg.inverted.insert_member(&labels, v);
                seg.members.insert(at, v);
                seg.out_labels.insert(at, labels.out[&v].clone());
            }
            (UpdateOp::Remove, Ok(at)) => {
                seg.inverted.remove_member(&labels, v);
                seg.members.remove(at);
                seg.out_labels.remove(at);
            }
            _ => unreachable!("no-op memberships returned above"),
        }
        let rewritten = encode_segment(&seg.inverted, &seg.members, |u| {
            let at = seg.members.binary_search(&u).expect("member");
            seg.out_labels[at].as_slice()
        })?;

        let mut segments = Vec::with_capacity(manifest.segments.len());
        for s in &manifest.segments {
            if s.category == c {
                segments.push(rewritten.as_slice().into());
            } else {
                segments.push(slice(&payload, s.span)?.into());
            }
        }
        let mut member_counts: Vec<u32> = manifest.segments.iter().map(|s| s.members).collect();
        member_counts[c as usize] = seg.members.len() as u32;
        let parts = PayloadParts {
            names: manifest.segments.iter().map(|s| s.name.as_str()).collect(),
            member_counts,
            segments,
            out_bytes,
            out_offsets: manifest.out_offsets.clone(),
            in_bytes,
            in_offsets: manifest.in_offsets.clone(),
        };
        let (new_payload, new_manifest) = assemble(
            parts,
            manifest.generation + 1,
            manifest.vertex_count,
            manifest.directed,
        );
        self.publish(&new_payload, &new_manifest, Some(&manifest))?;
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_labels, Algorithm, Query, QueryOptions};
    use crate::fixtures::{fixture_fig1, random_instance};

    fn fig1_store(dir: &Path) -> (IndexStore, KosrIndex) {
        let f = fixture_fig1();
        let (store, index, _) = IndexStore::build(dir, f.graph, f.names, f.categories).unwrap();
        (store, index)
    }

    #[test]
    fn fig1_has_three_segments_and_round_trips() {
        let tmp = tempfile::tempdir().unwrap();
        let (store, index) = fig1_store(tmp.path());
        let m = store.read_manifest().unwrap();
        assert_eq!(m.segments.len(), 3);
        assert_eq!(m.generation, 1);
        let mut a = Vec::new();
        m.write_to(&mut a).unwrap();
        let mut b = Vec::new();
        IndexManifest::read_from(&mut a.as_slice())
            .unwrap()
            .write_to(&mut b)
            .unwrap();
        assert_eq!(a, b);
        let loaded = store.load().unwrap();
        assert_eq!(loaded.labels, index.labels);
        assert_eq!(loaded.categories, index.categories);
        assert_eq!(loaded.inverted, index.inverted);
    }

    #[test]
    fn corrupt_manifest_is_detected() {
        let tmp = tempfile::tempdir().unwrap();
        let (store, _) = fig1_store(tmp.path());
        let path = tmp.path().join(MANIFEST_FILE);
        let mut bytes = fs::read(&path).unwrap();
        bytes[20] ^= 0xff;
        fs::write(&path, bytes).unwrap();
        assert!(matches!(store.read_manifest(), Err(Error::Corrupt(_))));
    }

    #[test]
    fn disk_view_matches_memory_and_counts_reads() {
        let tmp = tempfile::tempdir().unwrap();
        let (store, index) = fig1_store(tmp.path());
        let f = fixture_fig1();
        let seq = f.sequence(&["MA", "RE", "CI"]);
        let q = Query::new(f.v("s"), f.v("t"), seq.as_slice(), 3);
        let view = store
            .open_query_view(q.source, q.target, &q.sequence)
            .unwrap();
        assert_eq!(view.segment_reads(), 3 + 3);
        for a in [Algorithm::Kpne, Algorithm::Pruning, Algorithm::Star] {
            let disk = run_labels(&view, &view, a, &q, &QueryOptions::default()).unwrap();
            let mem = run_labels(
                &index.labels,
                &index.inverted,
                a,
                &q,
                &QueryOptions::default(),
            )
            .unwrap();
            assert_eq!(disk.witnesses, mem.witnesses);
        }
    }

    #[test]
    fn undirected_disk_view() {
        let mut inst = random_instance(11, 50, 3, 5);
        inst.graph = crate::fixtures::random_digraph(3, 50, 80, 1..=20, false);
        let tmp = tempfile::tempdir().unwrap();
        let names = VertexNames::identity(50);
        let (store, index, _) =
            IndexStore::build(tmp.path(), inst.graph, names, inst.categories).unwrap();
        let q = Query::new(
            inst.query.source,
            inst.query.target,
            inst.query.sequence.as_slice(),
            4,
        );
        let view = store
            .open_query_view(q.source, q.target, &q.sequence)
            .unwrap();
        let disk = run_labels(&view, &view, Algorithm::Star, &q, &QueryOptions::default()).unwrap();
        let mem = index
            .query(crate::Engine::SK, &q, &QueryOptions::default())
            .unwrap();
        assert_eq!(disk.witnesses, mem.witnesses);
    }

    #[test]
    fn update_matches_rebuild_and_bumps_generation() {
        let tmp = tempfile::tempdir().unwrap();
        let (store, mut index) = fig1_store(tmp.path());
        let f = fixture_fig1();
        let (b, ma) = (f.v("b"), f.c("MA"));
        assert!(store.update(UpdateOp::Add, b, ma).unwrap());
        assert!(!store.update(UpdateOp::Add, b, ma).unwrap());
        assert!(store.update(UpdateOp::Remove, f.v("a"), ma).unwrap());
        assert!(!store.update(UpdateOp::Remove, f.v("a"), ma).unwrap());
        index.add_vertex_category(b, ma).unwrap();
        index.remove_vertex_category(f.v("a"), ma).unwrap();
        let (cm, il) = store.load_categories().unwrap();
        assert_eq!(cm, index.categories);
        assert_eq!(il, index.inverted);
        let m = store.read_manifest().unwrap();
        assert_eq!(m.generation, 3);
        assert!(!tmp.path().join("index.1.bin").exists());
        assert!(!tmp.path().join("index.2.bin").exists());
        assert!(matches!(
            store.update(UpdateOp::Add, 99, ma),
            Err(Error::InvalidVertex(99))
        ));
        assert!(matches!(
            store.update(UpdateOp::Add, b, 9),
            Err(Error::UnknownCategory(9))
        ));
    }

    #[test]
    fn interrupted_update_keeps_old_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let (store, _) = fig1_store(tmp.path());
        // a writer that died after staging its payload and manifest
        fs::write(tmp.path().join("index.2.bin"), b"partial").unwrap();
        fs::write(tmp.path().join("manifest.tmp"), b"partial").unwrap();
        let m = store.read_manifest().unwrap();
        assert_eq!(m.generation, 1);
        assert!(store.load().is_ok());
    }

    #[test]
    fn lock_excludes_readers_and_writers() {
        let tmp = tempfile::tempdir().unwrap();
        let (store, _) = fig1_store(tmp.path());
        let lock = WriteLock::acquire(tmp.path()).unwrap();
        assert!(matches!(
            store.update(UpdateOp::Add, 0, 0),
            Err(Error::Locked(_))
        ));
        assert!(matches!(
            store.open_query_view(0, 7, &[0]),
            Err(Error::Locked(_))
        ));
        drop(lock);
        assert!(store.open_query_view(0, 7, &[0]).is_ok());
    }

    #[test]
    fn rebuild_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        fig1_store(a.path());
        fig1_store(b.path());
        for file in [
            GRAPH_FILE,
            NAMES_FILE,
            LABELS_FILE,
            MANIFEST_FILE,
            "index.1.bin",
        ] {
            assert_eq!(
                fs::read(a.path().join(file)).unwrap(),
                fs::read(b.path().join(file)).unwrap(),
                "{file}"
            );
        }
    }
}
