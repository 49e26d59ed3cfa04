//! Binary index file.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic       8 bytes  "ABDKBIDX"
//! version     u16
//! 'H' header   language string, concept count u32, assertion count u64
//! 'R' relations count u32, strings
//! 'C' concepts  count u32, strings
//! 'A' adjacency offsets (count+1) x u32, entry count u32,
//!               entries (neighbor u32, relation u16, direction u8, weight f64)
//! 'V' vocabulary count u32, (phrase string, concept u32) sorted by phrase
//! checksum    u64 xxh3 over every preceding byte
//! ```
//!
//! Strings are a u32 byte length followed by UTF-8 bytes.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use xxhash_rust::xxh3::xxh3_64;

use super::{ConceptId, Direction, Edge, KbError, RelationId, SemanticNetwork};

pub const INDEX_MAGIC: [u8; 8] = *b"ABDKBIDX";
pub const INDEX_VERSION: u16 = 1;

const ENTRY_BYTES: usize = 4 + 2 + 1 + 8;

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    put_u32(buf, s.len() as u32);
    buf.extend_from_slice(s.as_bytes());
}

/// Serializes the network. Output is a pure function of the network's
/// contents, so equal networks produce identical bytes.
pub fn write_index<W: Write>(net: &SemanticNetwork, out: &mut W) -> Result<u64, KbError> {
    let (buf, sum) = encode(net);
    out.write_all(&buf)?;
    net.set_checksum(sum);
    Ok(sum)
}

/// Index bytes and their checksum.
pub(crate) fn encode(net: &SemanticNetwork) -> (Vec<u8>, u64) {
    let (relations, concepts, offsets, edges) = net.raw_parts();
    let mut buf = Vec::with_capacity(64 + edges.len() * ENTRY_BYTES + offsets.len() * 4);
    buf.extend_from_slice(&INDEX_MAGIC);
    buf.extend_from_slice(&INDEX_VERSION.to_le_bytes());

    buf.push(b'H');
    put_str(&mut buf, net.language());
    put_u32(&mut buf, concepts.len() as u32);
    buf.extend_from_slice(&(net.stats().assertions as u64).to_le_bytes());

    buf.push(b'R');
    put_u32(&mut buf, relations.len() as u32);
    for r in relations {
        put_str(&mut buf, r);
    }

    buf.push(b'C');
    put_u32(&mut buf, concepts.len() as u32);
    for c in concepts {
        put_str(&mut buf, c);
    }

    buf.push(b'A');
    for &o in offsets {
        put_u32(&mut buf, o);
    }
    put_u32(&mut buf, edges.len() as u32);
    for e in edges {
        put_u32(&mut buf, e.neighbor.0);
        buf.extend_from_slice(&e.relation.0.to_le_bytes());
        buf.push(e.direction.to_byte());
        buf.extend_from_slice(&e.weight.to_le_bytes());
    }

    buf.push(b'V');
    let mut vocab: Vec<(&String, &ConceptId)> = net.vocabulary().iter().collect();
    vocab.sort_unstable();
    put_u32(&mut buf, vocab.len() as u32);
    for (phrase, id) in vocab {
        put_str(&mut buf, phrase);
        put_u32(&mut buf, id.0);
    }

    let sum = xxh3_64(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    (buf, sum)
}

pub fn persist_index(net: &SemanticNetwork, path: &Path) -> Result<u64, KbError> {
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    let sum = write_index(net, &mut file)?;
    file.flush()?;
    Ok(sum)
}

pub fn load_index(path: &Path) -> Result<SemanticNetwork, KbError> {
    let bytes = fs::read(path)?;
    read_index(&bytes)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn corrupt(what: impl Into<String>) -> KbError {
    KbError::CorruptIndex(what.into())
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], KbError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| corrupt("unexpected end of data"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, KbError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, KbError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, KbError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, KbError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, KbError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, KbError> {
        let n = self.u32()? as usize;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| corrupt("string is not utf-8"))
    }

    fn section(&mut self, tag: u8) -> Result<(), KbError> {
        let got = self.u8()?;
        if got != tag {
            return Err(corrupt(format!(
                "expected section '{}', found byte {got:#x}",
                tag as char
            )));
        }
        Ok(())
    }

    /// Guards allocations against absurd counts in damaged files.
    fn count(&mut self, unit: usize) -> Result<usize, KbError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(unit) > self.bytes.len() - self.pos {
            return Err(corrupt("count exceeds remaining data"));
        }
        Ok(n)
    }
}

pub fn read_index(bytes: &[u8]) -> Result<SemanticNetwork, KbError> {
    if bytes.len() < INDEX_MAGIC.len() + 2 + 8 {
        return Err(corrupt("file too short"));
    }
    if bytes[..8] != INDEX_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u16::from_le_bytes([bytes[8], bytes[9]]);
    if version != INDEX_VERSION {
        return Err(KbError::VersionMismatch {
            found: version,
            expected: INDEX_VERSION,
        });
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    let sum = xxh3_64(body);
    if stored != sum {
        return Err(corrupt("checksum mismatch"));
    }

    let mut c = Cursor { bytes: body, pos: 10 };
    c.section(b'H')?;
    let language = c.string()?;
    let concept_count = c.u32()? as usize;
    let assertions = c.u64()? as usize;

    c.section(b'R')?;
    let n = c.count(4)?;
    let relations = (0..n).map(|_| c.string()).collect::<Result<Vec<_>, _>>()?;

    c.section(b'C')?;
    let n = c.count(4)?;
    if n != concept_count {
        return Err(corrupt("concept count disagrees with header"));
    }
    let concepts = (0..n).map(|_| c.string()).collect::<Result<Vec<_>, _>>()?;

    c.section(b'A')?;
    let mut offsets = Vec::with_capacity(concept_count + 1);
    for _ in 0..=concept_count {
        offsets.push(c.u32()?);
    }
    let n = c.count(ENTRY_BYTES)?;
    if offsets.first() != Some(&0)
        || offsets.last().map(|&o| o as usize) != Some(n)
        || offsets.windows(2).any(|w| w[0] > w[1])
    {
        return Err(corrupt("adjacency offsets inconsistent"));
    }
    let mut edges = Vec::with_capacity(n);
    for _ in 0..n {
        let neighbor = c.u32()?;
        let relation = c.u16()?;
        let direction = Direction::from_byte(c.u8()?).ok_or_else(|| corrupt("bad direction"))?;
        let weight = c.f64()?;
        if neighbor as usize >= concept_count || relation as usize >= relations.len() {
            return Err(corrupt("edge references unknown concept or relation"));
        }
        edges.push(Edge {
            neighbor: ConceptId(neighbor),
            relation: RelationId(relation),
            direction,
            weight,
        });
    }

    c.section(b'V')?;
    let n = c.count(8)?;
    let mut vocabulary = HashMap::with_capacity(n);
    for _ in 0..n {
        let phrase = c.string()?;
        let id = c.u32()?;
        if id as usize >= concept_count {
            return Err(corrupt("vocabulary references unknown concept"));
        }
        vocabulary.insert(phrase, ConceptId(id));
    }
    if c.pos != body.len() {
        return Err(corrupt("trailing bytes before checksum"));
    }

    let net = SemanticNetwork::from_raw(
        language, relations, concepts, offsets, edges, vocabulary, assertions,
    );
    net.set_checksum(sum);
    Ok(net)
}
