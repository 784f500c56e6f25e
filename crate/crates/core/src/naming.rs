//! Hierarchical content names.
//!
//! ```text
//! /<service>/<dataset>/MetaData
//! /<service>/<dataset>/TimeWindow_YYYYMMDDTHHMMSS/GoF_NNNN/TopLayer
//! /<service>/<dataset>/TimeWindow_YYYYMMDDTHHMMSS/GoF_NNNN/LastLayer/<segment>
//! ```
//!
//! Any of these may carry a trailing chunk component `c=<n>`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layering::RetentionLadder;

pub const DEFAULT_SERVICE: &str = "PointCloudService";
const WINDOW_PREFIX: &str = "TimeWindow_";
const WINDOW_FORMAT: &str = "%Y%m%dT%H%M%S";

/// Canonical text form `/c0/c1/...`; cheap to clone and hash.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Name(Arc<str>);

impl Name {
    pub fn parse(text: &str) -> Result<Self> {
        let Some(rest) = text.strip_prefix('/') else {
            return Err(Error::Name {
                index: 0,
                message: format!("`{text}` does not start with '/'"),
            });
        };
        if let Some(i) = rest.split('/').position(str::is_empty) {
            return Err(Error::Name {
                index: i,
                message: format!("empty component in `{text}`"),
            });
        }
        Ok(Name(Arc::from(text)))
    }

    pub fn from_components<S: AsRef<str>>(components: &[S]) -> Result<Self> {
        let mut text = String::new();
        for (i, c) in components.iter().enumerate() {
            let c = c.as_ref();
            if c.is_empty() || c.contains('/') {
                return Err(Error::Name {
                    index: i,
                    message: format!("invalid component `{c}`"),
                });
            }
            text.push('/');
            text.push_str(c);
        }
        if text.is_empty() {
            return Err(Error::Name {
                index: 0,
                message: "a name needs at least one component".into(),
            });
        }
        Ok(Name(Arc::from(text)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn components(&self) -> impl Iterator<Item = &str> {
        self.0[1..].split('/')
    }

    pub fn len(&self) -> usize {
        self.components().count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Appends one component; the component must be non-empty and slash-free.
    pub fn child(&self, component: &str) -> Result<Self> {
        if component.is_empty() || component.contains('/') {
            return Err(Error::Name {
                index: self.len(),
                message: format!("invalid component `{component}`"),
            });
        }
        Ok(Name(Arc::from(format!("{}/{component}", self.0))))
    }

    pub fn with_chunk(&self, chunk: u64) -> Self {
        Name(Arc::from(format!("{}/c={chunk}", self.0)))
    }

    /// Chunk index when the last component is `c=<n>`.
    pub fn chunk(&self) -> Option<u64> {
        self.components().last()?.strip_prefix("c=")?.parse().ok()
    }

    /// The name without its chunk component, or itself when there is none.
    pub fn without_chunk(&self) -> Self {
        match (self.chunk(), self.0.rfind('/')) {
            (Some(_), Some(i)) if i > 0 => Name(Arc::from(&self.0[..i])),
            _ => self.clone(),
        }
    }

    /// Prefixes of this name from longest to shortest, excluding itself.
    pub fn ancestors(&self) -> impl Iterator<Item = &str> {
        let text = &*self.0;
        text.char_indices()
            .rev()
            .filter(|&(i, c)| c == '/' && i > 0)
            .map(move |(i, _)| &text[..i])
    }

    pub fn has_prefix(&self, prefix: &Name) -> bool {
        is_prefix(prefix, self)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({})", self.0)
    }
}

// Hash and Eq of `Name` are those of its text, so `&str` lookups are sound.
impl std::borrow::Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl FromStr for Name {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Name::parse(s)
    }
}

impl TryFrom<String> for Name {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Name::parse(&s)
    }
}

impl From<Name> for String {
    fn from(n: Name) -> Self {
        n.0.to_string()
    }
}

/// Component-wise prefix test.
pub fn is_prefix(prefix: &Name, name: &Name) -> bool {
    let (p, n) = (prefix.as_str(), name.as_str());
    n.starts_with(p) && (n.len() == p.len() || n.as_bytes()[p.len()] == b'/')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layer {
    TopLayer,
    LastLayer,
    MetaData,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Layer::TopLayer => "TopLayer",
            Layer::LastLayer => "LastLayer",
            Layer::MetaData => "MetaData",
        }
    }
}

/// Structured form of a content name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContentId {
    pub service: String,
    pub dataset: String,
    /// Full token, e.g. `TimeWindow_20240314T120000`.
    pub time_window: Option<String>,
    pub gof: Option<u32>,
    pub layer: Layer,
    pub segment: Option<String>,
    pub chunk: Option<u64>,
}

impl ContentId {
    pub fn metadata(dataset: &str) -> Self {
        ContentId {
            service: DEFAULT_SERVICE.into(),
            dataset: dataset.into(),
            time_window: None,
            gof: None,
            layer: Layer::MetaData,
            segment: None,
            chunk: None,
        }
    }

    pub fn top_layer(dataset: &str, window: &str, gof: u32) -> Self {
        ContentId {
            service: DEFAULT_SERVICE.into(),
            dataset: dataset.into(),
            time_window: Some(window.into()),
            gof: Some(gof),
            layer: Layer::TopLayer,
            segment: None,
            chunk: None,
        }
    }

    pub fn last_layer(dataset: &str, window: &str, gof: u32, segment: &str) -> Self {
        ContentId {
            layer: Layer::LastLayer,
            segment: Some(segment.into()),
            ..Self::top_layer(dataset, window, gof)
        }
    }

    pub fn with_chunk(mut self, chunk: u64) -> Self {
        self.chunk = Some(chunk);
        self
    }
}

pub fn time_window_token(start: NaiveDateTime) -> String {
    format!("{WINDOW_PREFIX}{}", start.format(WINDOW_FORMAT))
}

fn valid_window(token: &str) -> bool {
    token
        .strip_prefix(WINDOW_PREFIX)
        .filter(|t| t.len() == 15)
        .is_some_and(|t| NaiveDateTime::parse_from_str(t, WINDOW_FORMAT).is_ok())
}

fn parse_gof(token: &str) -> Option<u32> {
    let digits = token.strip_prefix("GoF_")?;
    if digits.len() != 4 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().filter(|&g| g >= 1)
}

fn valid_segment(s: &str) -> bool {
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    if digits(s) {
        return true;
    }
    s.strip_prefix("enhanced")
        .and_then(|r| r.split_once('-'))
        .is_some_and(|(a, b)| digits(a) && digits(b))
}

pub fn format_name(id: &ContentId) -> Result<Name> {
    let mut parts: Vec<String> = vec![id.service.clone(), id.dataset.clone()];
    match id.layer {
        Layer::MetaData => {
            if id.time_window.is_some() || id.gof.is_some() || id.segment.is_some() {
                return Err(Error::domain("MetaData names carry no window, GoF or segment"));
            }
            parts.push(Layer::MetaData.as_str().into());
        }
        Layer::TopLayer | Layer::LastLayer => {
            let window = id
                .time_window
                .as_deref()
                .filter(|w| valid_window(w))
                .ok_or_else(|| Error::domain(format!("bad time window {:?}", id.time_window)))?;
            let gof = id
                .gof
                .filter(|g| (1..=9999).contains(g))
                .ok_or_else(|| Error::domain(format!("GoF {:?} outside 1..=9999", id.gof)))?;
            parts.push(window.into());
            parts.push(format!("GoF_{gof:04}"));
            parts.push(id.layer.as_str().into());
            match (id.layer, &id.segment) {
                (Layer::LastLayer, Some(s)) if valid_segment(s) => parts.push(s.clone()),
                (Layer::TopLayer, None) => {}
                _ => {
                    return Err(Error::domain(format!(
                        "segment {:?} invalid for {}",
                        id.segment,
                        id.layer.as_str()
                    )))
                }
            }
        }
    }
    if let Some(c) = id.chunk {
        parts.push(format!("c={c}"));
    }
    Name::from_components(&parts)
}

pub fn parse_name(text: &str) -> Result<ContentId> {
    let name = Name::parse(text)?;
    let comps: Vec<&str> = name.components().collect();
    let err = |index: usize, message: String| Error::Name { index, message };
    let (body, chunk) = match comps.last().and_then(|c| c.strip_prefix("c=")) {
        Some(n) => {
            let c = n
                .parse()
                .map_err(|_| err(comps.len() - 1, format!("bad chunk component `c={n}`")))?;
            (&comps[..comps.len() - 1], Some(c))
        }
        None => (&comps[..], None),
    };
    if body.len() < 3 {
        return Err(err(body.len(), "name too short".into()));
    }
    let mut id = ContentId {
        service: body[0].into(),
        dataset: body[1].into(),
        time_window: None,
        gof: None,
        layer: Layer::MetaData,
        segment: None,
        chunk,
    };
    if body[2] == "MetaData" {
        if body.len() != 3 {
            return Err(err(3, "unexpected component after MetaData".into()));
        }
        return Ok(id);
    }
    if !valid_window(body[2]) {
        return Err(err(2, format!("malformed time window `{}`", body[2])));
    }
    id.time_window = Some(body[2].into());
    let gof = body.get(3).ok_or_else(|| err(3, "missing GoF component".into()))?;
    id.gof = Some(parse_gof(gof).ok_or_else(|| err(3, format!("malformed GoF token `{gof}`")))?);
    match body.get(4).copied() {
        Some("TopLayer") if body.len() == 5 => id.layer = Layer::TopLayer,
        Some("LastLayer") if body.len() == 6 => {
            if !valid_segment(body[5]) {
                return Err(err(5, format!("unknown segment `{}`", body[5])));
            }
            id.layer = Layer::LastLayer;
            id.segment = Some(body[5].into());
        }
        Some(l @ ("TopLayer" | "LastLayer")) => return Err(err(5, format!("wrong component count after {l}"))),
        other => return Err(err(4, format!("unknown layer token {other:?}"))),
    }
    Ok(id)
}

/// TopLayer followed by the ladder's LastLayer segments for one GoF.
pub fn enumerate_gof_segments(dataset: &str, window: &str, gof: u32) -> Result<Vec<Name>> {
    enumerate_gof_segments_with(dataset, window, gof, &RetentionLadder::default())
}

pub fn enumerate_gof_segments_with(
    dataset: &str,
    window: &str,
    gof: u32,
    ladder: &RetentionLadder,
) -> Result<Vec<Name>> {
    let mut out = vec![format_name(&ContentId::top_layer(dataset, window, gof))?];
    for s in ladder.suffixes() {
        out.push(format_name(&ContentId::last_layer(dataset, window, gof, &s))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const W: &str = "TimeWindow_20240314T120000";

    fn n(s: &str) -> Name {
        Name::parse(s).unwrap()
    }

    #[test]
    fn metadata_layout() {
        let name = format_name(&ContentId::metadata("8iVFB_loot")).unwrap();
        assert_eq!(name.as_str(), "/PointCloudService/8iVFB_loot/MetaData");
    }

    #[test]
    fn enhancement_layout_and_chunk() {
        let id = ContentId::last_layer("DS", W, 1, "enhanced30-50");
        let name = format_name(&id).unwrap();
        assert_eq!(
            name.as_str(),
            "/PointCloudService/DS/TimeWindow_20240314T120000/GoF_0001/LastLayer/enhanced30-50"
        );
        let chunked = format_name(&id.clone().with_chunk(7)).unwrap();
        assert_eq!(chunked.as_str(), format!("{name}/c=7"));
        assert_eq!(chunked.chunk(), Some(7));
        assert_eq!(chunked.without_chunk(), name);
    }

    #[test]
    fn base_segment_row_parses() {
        let id = parse_name("/PointCloudService/DataSetID/TimeWindow_20240314T120000/GoF_0001/LastLayer/30").unwrap();
        assert_eq!(id.layer, Layer::LastLayer);
        assert_eq!(id.segment.as_deref(), Some("30"));
        assert_eq!(id.gof, Some(1));
    }

    #[test]
    fn malformed_tokens_cite_component() {
        assert!(parse_name("/PointCloudService/DS/TimeWindow_X/GoF_01/TopLayer").is_err());
        let e = parse_name(&format!("/PointCloudService/DS/{W}/GoF_01/TopLayer")).unwrap_err();
        assert!(matches!(e, Error::Name { index: 3, .. }), "{e}");
        let e = parse_name(&format!("/PointCloudService/DS/{W}/GoF_0001/MidLayer")).unwrap_err();
        assert!(matches!(e, Error::Name { index: 4, .. }), "{e}");
        let e = parse_name("/PointCloudService/DS/TimeWindow_2024/GoF_0001/TopLayer").unwrap_err();
        assert!(matches!(e, Error::Name { index: 2, .. }), "{e}");
        assert!(parse_name(&format!("/PointCloudService/DS/{W}/GoF_0001/LastLayer/x")).is_err());
        assert!(parse_name("no/leading/slash").is_err());
    }

    #[test]
    fn invalid_ids_rejected_by_format() {
        let mut id = ContentId::top_layer("DS", W, 1);
        id.segment = Some("30".into());
        assert!(format_name(&id).is_err());
        let mut id = ContentId::metadata("DS");
        id.gof = Some(1);
        assert!(format_name(&id).is_err());
        assert!(format_name(&ContentId::top_layer("DS", W, 0)).is_err());
    }

    #[test]
    fn prefix_is_component_wise() {
        assert!(is_prefix(&n("/A"), &n("/A/B")));
        assert!(!is_prefix(&n("/A/B"), &n("/A")));
        assert!(!is_prefix(&n("/A/BC"), &n("/A/B")));
        assert!(!is_prefix(&n("/A/B"), &n("/A/BC")));
        assert!(is_prefix(&n("/A/B"), &n("/A/B")));
        let abc = n("/A/B/C");
        let anc: Vec<&str> = abc.ancestors().collect();
        assert_eq!(anc, vec!["/A/B", "/A"]);
    }

    #[test]
    fn gof_enumeration() {
        let names = enumerate_gof_segments("DS", W, 1).unwrap();
        assert_eq!(names.len(), 5);
        let base = n(&format!("/PointCloudService/DS/{W}/GoF_0001"));
        assert!(names.iter().all(|x| is_prefix(&base, x)));
        let set: std::collections::HashSet<_> = names.iter().collect();
        assert_eq!(set.len(), 5);
        assert!(names[0].as_str().ends_with("/TopLayer"));
        assert!(names[4].as_str().ends_with("/LastLayer/enhanced75-100"));
        assert_eq!(names, enumerate_gof_segments("DS", W, 1).unwrap());
    }

    fn arb_id() -> impl Strategy<Value = ContentId> {
        let seg = prop::sample::select(vec!["30", "enhanced30-50", "enhanced50-75", "enhanced75-100"]);
        (
            "[A-Za-z0-9_]{1,12}",
            0u8..3,
            1u32..10000,
            (2000i32..2100, 1u32..13, 1u32..29, 0u32..24, 0u32..60, 0u32..60),
            seg,
            prop::option::of(0u64..100_000),
        )
            .prop_map(|(ds, kind, gof, (y, mo, d, h, mi, s), seg, chunk)| {
                let dt = chrono::NaiveDate::from_ymd_opt(y, mo, d)
                    .unwrap()
                    .and_hms_opt(h, mi, s)
                    .unwrap();
                let w = time_window_token(dt);
                let id = match kind {
                    0 => ContentId::metadata(&ds),
                    1 => ContentId::top_layer(&ds, &w, gof),
                    _ => ContentId::last_layer(&ds, &w, gof, seg),
                };
                ContentId { chunk, ..id }
            })
    }

    proptest! {
        #[test]
        fn format_parse_bijection(id in arb_id()) {
            let name = format_name(&id).unwrap();
            prop_assert_eq!(&parse_name(name.as_str()).unwrap(), &id);
            prop_assert_eq!(Name::parse(name.as_str()).unwrap(), name);
        }

        #[test]
        fn prefix_transitive(a in "[ab]{1,3}", b in "[ab]{1,3}", c in "[ab]{1,3}") {
            let x = n(&format!("/{a}"));
            let y = n(&format!("/{a}/{b}"));
            let z = n(&format!("/{a}/{b}/{c}"));
            prop_assert!(is_prefix(&x, &y) && is_prefix(&y, &z) && is_prefix(&x, &z));
            prop_assert!(is_prefix(&z, &z));
        }
    }
}
