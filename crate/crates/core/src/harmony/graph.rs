use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{Chord, SectionTemplate};
use crate::error::{ConfigError, InputError};
use crate::rng;

/// Index of a vertex in a [`ChordGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChordId(pub usize);

/// Valence band selecting which edge set is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// `valence <= split`
    Low,
    /// `valence > split`
    High,
}

impl Band {
    pub const ALL: [Band; 2] = [Band::Low, Band::High];

    pub fn for_valence(valence: f64, split: f64) -> Band {
        if valence <= split {
            Band::Low
        } else {
            Band::High
        }
    }

    fn idx(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Band::Low => "low",
            Band::High => "high",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub to: ChordId,
    pub probability: f64,
}

/// One problem found by [`ChordGraph::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum GraphViolation {
    RowSum { from: String, band: Band, sum: f64 },
    BadProbability { from: String, band: Band, to: String, probability: f64 },
    Unreachable { band: Band, from: String, to: String },
    UnknownChord(String),
    DuplicateChord(String),
    Empty,
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphViolation::RowSum { from, band, sum } => {
                write!(f, "{from} ({band} band): row sums to {sum}")
            }
            GraphViolation::BadProbability { from, band, to, probability } => {
                write!(f, "{from} -> {to} ({band} band): probability {probability} outside [0, 1]")
            }
            GraphViolation::Unreachable { band, from, to } => {
                write!(f, "{to} is unreachable from {from} in the {band} band")
            }
            GraphViolation::UnknownChord(name) => write!(f, "unknown chord `{name}`"),
            GraphViolation::DuplicateChord(name) => write!(f, "chord `{name}` defined twice"),
            GraphViolation::Empty => f.write_str("graph has no chords"),
        }
    }
}

const SUM_TOLERANCE: f64 = 1e-9;

/// Directed probabilistic chord graph with one edge set per valence band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphSource", into = "GraphSource")]
pub struct ChordGraph {
    chords: Vec<Chord>,
    /// `edges[band][vertex]`
    edges: [Vec<Vec<Edge>>; 2],
    start: ChordId,
    band_split: f64,
}

impl ChordGraph {
    /// Builds a graph without validating it; see [`ChordGraph::validate`].
    pub fn from_parts(chords: Vec<Chord>, start: ChordId, band_split: f64) -> Self {
        let n = chords.len();
        ChordGraph { chords, edges: [vec![Vec::new(); n], vec![Vec::new(); n]], start, band_split }
    }

    pub fn add_edge(&mut self, band: Band, from: ChordId, to: ChordId, probability: f64) {
        self.edges[band.idx()][from.0].push(Edge { to, probability });
    }

    pub fn chords(&self) -> &[Chord] {
        &self.chords
    }

    pub fn chord(&self, id: ChordId) -> &Chord {
        &self.chords[id.0]
    }

    pub fn id_of(&self, name: &str) -> Option<ChordId> {
        self.chords.iter().position(|c| c.name == name).map(ChordId)
    }

    /// Virtual predecessor of the first bar.
    pub fn start(&self) -> ChordId {
        self.start
    }

    pub fn band_split(&self) -> f64 {
        self.band_split
    }

    pub fn band(&self, valence: f64) -> Band {
        Band::for_valence(valence, self.band_split)
    }

    pub fn edges(&self, from: ChordId, band: Band) -> &[Edge] {
        &self.edges[band.idx()][from.0]
    }

    /// Checks row sums, probability ranges and per-band strong connectivity.
    /// Reports every violation found.
    pub fn validate(&self) -> Result<(), Vec<GraphViolation>> {
        let mut out = Vec::new();
        if self.chords.is_empty() {
            return Err(vec![GraphViolation::Empty]);
        }
        for (i, c) in self.chords.iter().enumerate() {
            if self.chords[..i].iter().any(|p| p.name == c.name) {
                out.push(GraphViolation::DuplicateChord(c.name.clone()));
            }
        }
        if self.start.0 >= self.chords.len() {
            out.push(GraphViolation::UnknownChord(alloc::format!("#{}", self.start.0)));
        }
        for band in Band::ALL {
            for (v, row) in self.edges[band.idx()].iter().enumerate() {
                let from = &self.chords[v].name;
                for e in row {
                    if e.to.0 >= self.chords.len() {
                        out.push(GraphViolation::UnknownChord(alloc::format!("#{}", e.to.0)));
                    } else if !(0.0..=1.0).contains(&e.probability) {
                        out.push(GraphViolation::BadProbability {
                            from: from.clone(),
                            band,
                            to: self.chords[e.to.0].name.clone(),
                            probability: e.probability,
                        });
                    }
                }
                if row.is_empty() {
                    continue;
                }
                let sum: f64 = row.iter().map(|e| e.probability).sum();
                if (sum - 1.0).abs() > SUM_TOLERANCE {
                    out.push(GraphViolation::RowSum { from: from.clone(), band, sum });
                }
            }
            self.check_connectivity(band, &mut out);
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn reach(&self, band: Band, origin: usize, reverse: bool) -> Vec<bool> {
        let n = self.chords.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([origin]);
        seen[origin] = true;
        while let Some(v) = queue.pop_front() {
            for (u, row) in self.edges[band.idx()].iter().enumerate() {
                for e in row.iter().filter(|e| e.probability > 0.0 && e.to.0 < n) {
                    let (src, dst) = if reverse { (e.to.0, u) } else { (u, e.to.0) };
                    if src == v && !seen[dst] {
                        seen[dst] = true;
                        queue.push_back(dst);
                    }
                }
            }
        }
        seen
    }

    fn check_connectivity(&self, band: Band, out: &mut Vec<GraphViolation>) {
        // strongly connected iff vertex 0 reaches everything and everything reaches 0
        let root = &self.chords[0].name;
        for (v, ok) in self.reach(band, 0, false).into_iter().enumerate() {
            if !ok {
                out.push(GraphViolation::Unreachable {
                    band,
                    from: root.clone(),
                    to: self.chords[v].name.clone(),
                });
            }
        }
        for (v, ok) in self.reach(band, 0, true).into_iter().enumerate() {
            if !ok {
                out.push(GraphViolation::Unreachable {
                    band,
                    from: self.chords[v].name.clone(),
                    to: root.clone(),
                });
            }
        }
    }

    fn check_vertex(&self, id: ChordId) -> Result<(), InputError> {
        if id.0 < self.chords.len() {
            Ok(())
        } else {
            Err(InputError::UnknownChord(id.0))
        }
    }

    /// Samples a successor of `current` from the edge set of `valence`'s band.
    pub fn next_chord<R: RngCore + ?Sized>(
        &self,
        current: ChordId,
        valence: f64,
        rng: &mut R,
    ) -> Result<ChordId, InputError> {
        self.check_vertex(current)?;
        let row = self.edges(current, self.band(valence));
        let weights: Vec<f64> = row.iter().map(|e| e.probability).collect();
        Ok(rng::weighted(rng, &weights).map_or(current, |i| row[i].to))
    }

    /// Successor distribution restricted to chords with `function`,
    /// renormalised. Falls back to a uniform choice over every vocabulary
    /// chord with that function when no edge qualifies.
    pub fn candidates(
        &self,
        current: ChordId,
        valence: f64,
        function: &str,
    ) -> Result<Vec<(ChordId, f64)>, InputError> {
        self.check_vertex(current)?;
        let mut out: Vec<(ChordId, f64)> = self
            .edges(current, self.band(valence))
            .iter()
            .filter(|e| e.probability > 0.0 && self.chords[e.to.0].function == function)
            .map(|e| (e.to, e.probability))
            .collect();
        if out.is_empty() {
            out = self
                .chords
                .iter()
                .enumerate()
                .filter(|(_, c)| c.function == function)
                .map(|(i, _)| (ChordId(i), 1.0))
                .collect();
        }
        let total: f64 = out.iter().map(|(_, p)| p).sum();
        for (_, p) in &mut out {
            *p /= total;
        }
        Ok(out)
    }

    /// Samples a successor of `current` whose function matches the next bar.
    pub fn next_for_function<R: RngCore + ?Sized>(
        &self,
        current: ChordId,
        valence: f64,
        function: &str,
        rng: &mut R,
    ) -> Result<ChordId, InputError> {
        let cands = self.candidates(current, valence, function)?;
        let weights: Vec<f64> = cands.iter().map(|(_, p)| *p).collect();
        Ok(rng::weighted(rng, &weights).map_or(current, |i| cands[i].0))
    }

    /// Whether every vertex has a direct edge into every function of
    /// `template` in both bands, so slot restriction never needs the
    /// uniform fallback.
    pub fn covers_template(&self, template: &SectionTemplate) -> bool {
        let functions = template.functions();
        Band::ALL.iter().all(|&band| {
            self.edges[band.idx()].iter().all(|row| {
                functions.iter().all(|f| {
                    row.iter().any(|e| e.probability > 0.0 && self.chords[e.to.0].function == *f)
                })
            })
        })
    }
}

/// One chord per bar, bar `i` sampled under `valences[i]` and constrained to
/// the template's function for that bar.
pub fn progression_for<R: RngCore + ?Sized>(
    template: &SectionTemplate,
    bars: u32,
    valences: &[f64],
    graph: &ChordGraph,
    rng: &mut R,
) -> Result<Vec<ChordId>, InputError> {
    if !matches!(bars, 4 | 8 | 16 | 32) {
        return Err(InputError::BarCount(bars));
    }
    if valences.len() != bars as usize {
        return Err(InputError::LengthMismatch { expected: bars as usize, got: valences.len() });
    }
    let mut current = graph.start();
    let mut out = Vec::with_capacity(valences.len());
    for (bar, &v) in valences.iter().enumerate() {
        current = graph.next_for_function(current, v, template.function_at(bar as u32), rng)?;
        out.push(current);
    }
    Ok(out)
}

/// Human-editable form of a chord graph, with vertices referenced by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSource {
    pub band_split: f64,
    pub start: String,
    pub chords: Vec<Chord>,
    pub edges: Vec<EdgeList>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeList {
    pub from: String,
    pub band: Band,
    pub to: Vec<(String, f64)>,
}

impl TryFrom<GraphSource> for ChordGraph {
    type Error = ConfigError;

    fn try_from(src: GraphSource) -> Result<Self, Self::Error> {
        let mut unknown = Vec::new();
        let lookup = |name: &str, unknown: &mut Vec<GraphViolation>| {
            let id = src.chords.iter().position(|c| c.name == name);
            if id.is_none() {
                unknown.push(GraphViolation::UnknownChord(name.into()));
            }
            id.map(ChordId)
        };
        let start = lookup(&src.start, &mut unknown).unwrap_or(ChordId(0));
        let mut graph = ChordGraph::from_parts(src.chords.clone(), start, src.band_split);
        for list in &src.edges {
            let Some(from) = lookup(&list.from, &mut unknown) else { continue };
            for (to, p) in &list.to {
                if let Some(to) = lookup(to, &mut unknown) {
                    graph.add_edge(list.band, from, to, *p);
                }
            }
        }
        if !unknown.is_empty() {
            return Err(ConfigError::Graph(unknown));
        }
        graph.validate().map_err(ConfigError::Graph)?;
        Ok(graph)
    }
}

impl From<ChordGraph> for GraphSource {
    fn from(g: ChordGraph) -> Self {
        let mut edges = Vec::new();
        for band in Band::ALL {
            for (v, row) in g.edges[band.idx()].iter().enumerate() {
                if row.is_empty() {
                    continue;
                }
                edges.push(EdgeList {
                    from: g.chords[v].name.clone(),
                    band,
                    to: row.iter().map(|e| (g.chords[e.to.0].name.clone(), e.probability)).collect(),
                });
            }
        }
        GraphSource {
            band_split: g.band_split,
            start: g.chords.get(g.start.0).map(|c| c.name.clone()).unwrap_or_default(),
            chords: g.chords,
            edges,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmony::Quality;
    use crate::rng::{bar_rng, Stream};

    fn two_chords() -> ChordGraph {
        let mut g = ChordGraph::from_parts(
            vec![Chord::new("C", 0, Quality::Major, "I"), Chord::new("G", 7, Quality::Major, "V")],
            ChordId(1),
            0.5,
        );
        for band in Band::ALL {
            g.add_edge(band, ChordId(0), ChordId(1), 1.0);
            g.add_edge(band, ChordId(1), ChordId(0), 1.0);
        }
        g
    }

    #[test]
    fn short_row_is_reported() {
        let mut g = two_chords();
        g.edges[0][0] = vec![
            Edge { to: ChordId(1), probability: 0.5 },
            Edge { to: ChordId(0), probability: 0.4 },
        ];
        let errs = g.validate().unwrap_err();
        assert_eq!(errs.len(), 1);
        let msg = alloc::format!("{}", errs[0]);
        assert!(msg.contains("row sums to 0.9"), "{msg}");
    }

    #[test]
    fn all_violations_are_returned() {
        let mut g = two_chords();
        g.edges[0][0] = vec![Edge { to: ChordId(0), probability: 0.7 }];
        let errs = g.validate().unwrap_err();
        // short row plus G unreachable from C in the low band
        assert!(errs.iter().any(|e| matches!(e, GraphViolation::RowSum { .. })));
        assert!(errs.iter().any(|e| matches!(e, GraphViolation::Unreachable { .. })));
    }

    #[test]
    fn single_self_loop_is_valid() {
        let mut g = ChordGraph::from_parts(vec![Chord::new("C", 0, Quality::Major, "I")], ChordId(0), 0.5);
        g.add_edge(Band::Low, ChordId(0), ChordId(0), 1.0);
        g.add_edge(Band::High, ChordId(0), ChordId(0), 1.0);
        assert_eq!(g.validate(), Ok(()));
    }

    #[test]
    fn deterministic_edge() {
        let g = two_chords();
        let mut rng = bar_rng(0, 0, Stream::Harmony);
        for _ in 0..20 {
            assert_eq!(g.next_chord(ChordId(0), 0.9, &mut rng), Ok(ChordId(1)));
        }
        assert_eq!(g.next_chord(ChordId(5), 0.9, &mut rng), Err(InputError::UnknownChord(5)));
    }

    #[test]
    fn progression_length_contract() {
        let g = two_chords();
        let t = SectionTemplate::new(
            ["I", "V", "I", "V", "I", "V", "I", "V"].map(String::from).to_vec(),
            ["I", "V", "I", "V", "I", "V", "I", "V"].map(String::from).to_vec(),
        )
        .unwrap();
        let mut rng = bar_rng(0, 0, Stream::Harmony);
        let err = progression_for(&t, 4, &[0.5; 5], &g, &mut rng).unwrap_err();
        assert_eq!(err, InputError::LengthMismatch { expected: 4, got: 5 });
        assert_eq!(progression_for(&t, 5, &[0.5; 5], &g, &mut rng), Err(InputError::BarCount(5)));
        let p = progression_for(&t, 4, &[0.5; 4], &g, &mut rng).unwrap();
        assert_eq!(p, vec![ChordId(0), ChordId(1), ChordId(0), ChordId(1)]);
    }

    #[test]
    fn source_round_trip_and_unknown_names() {
        let g = two_chords();
        let src = GraphSource::from(g.clone());
        assert_eq!(ChordGraph::try_from(src.clone()).unwrap(), g);
        let mut bad = src;
        bad.edges[0].to[0].0 = "F#".into();
        assert!(matches!(ChordGraph::try_from(bad), Err(ConfigError::Graph(v)) if v == vec![GraphViolation::UnknownChord("F#".into())]));
    }
}
