use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::codec::SyntheticShape;
use crate::content::{EncodeParams, FrameSource};
use crate::dash::{AbrVariant, DashOptions};
use crate::error::{Error, Result};
use crate::netsim::{
    time, Link, LinkSpec, LossModel, SimTime, Topology, TopologyKind, TopologyParams, DEFAULT_QUEUE_LIMIT,
};
use crate::sim::IndsOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Inds,
    DashPc,
    PccDash,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Inds, Protocol::DashPc, Protocol::PccDash];

    pub fn label(self) -> &'static str {
        match self {
            Protocol::Inds => "inds",
            Protocol::DashPc => "dash_pc",
            Protocol::PccDash => "pcc_dash",
        }
    }

    pub fn abr(self) -> Option<AbrVariant> {
        match self {
            Protocol::Inds => None,
            Protocol::DashPc => Some(AbrVariant::DashPc),
            Protocol::PccDash => Some(AbrVariant::PccDash),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.label() == s)
            .ok_or_else(|| Error::config("protocol", format!("unknown protocol `{s}`")))
    }
}

/// Deserializes JSON into a config error carrying the failing key path, or
/// `root` when the document itself is malformed.
pub fn parse_config<T: DeserializeOwned>(text: &str, root: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        Error::config(
            if key == "." { root.to_string() } else { key },
            e.into_inner().to_string(),
        )
    })
}

/// Which links draw losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossScope {
    /// Consumer attachment links only.
    Access,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    /// Wiring used by INDS runs.
    pub inds: TopologyKind,
    /// Wiring used by both DASH variants.
    pub dash: TopologyKind,
    pub consumers: usize,
    pub forwarders: usize,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            inds: TopologyKind::IndsTree,
            dash: TopologyKind::CdnThreeTier,
            consumers: 10,
            forwarders: 10,
        }
    }
}

/// Content served by the producer: a stored encoding or frames to encode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Store {
        path: PathBuf,
    },
    Encode {
        source: FrameSource,
        #[serde(default)]
        params: EncodeParams,
    },
}

impl Default for DatasetSpec {
    /// 40k-point sphere shell: per-GoF level sizes straddle 10, 50 and 80 Mbps.
    fn default() -> Self {
        DatasetSpec::Encode {
            source: FrameSource::Synthetic {
                shape: SyntheticShape::SphereShell,
                n_points: 40_000,
                seed: 1,
            },
            params: EncodeParams::default(),
        }
    }
}

/// One simulation run. Every field has a default, so `{}` is a valid scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub protocol: Protocol,
    pub topology: TopologyConfig,
    /// Access link bandwidth.
    pub bandwidth_mbps: f64,
    /// Bernoulli loss probability in percent; ignored when `loss_model` is set.
    pub loss_pct: f64,
    pub loss_model: Option<LossModel>,
    pub loss_scope: LossScope,
    /// Per hop, both tiers.
    pub prop_delay_ms: f64,
    pub core_bandwidth_mbps: f64,
    pub queue_limit_packets: usize,
    pub dataset: DatasetSpec,
    /// Consumer k starts at `k · stagger_ms`.
    pub stagger_ms: f64,
    pub inds: IndsOptions,
    pub dash: DashOptions,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            id: "default".into(),
            protocol: Protocol::Inds,
            topology: TopologyConfig::default(),
            bandwidth_mbps: 50.0,
            loss_pct: 0.0,
            loss_model: None,
            loss_scope: LossScope::Access,
            prop_delay_ms: 2.0,
            core_bandwidth_mbps: 1000.0,
            queue_limit_packets: DEFAULT_QUEUE_LIMIT,
            dataset: DatasetSpec::default(),
            stagger_ms: 200.0,
            inds: IndsOptions::default(),
            dash: DashOptions::default(),
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    /// Parses and validates; errors name the offending key path.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = parse_config(text, "scenario")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bandwidth_mbps", self.bandwidth_mbps),
            ("core_bandwidth_mbps", self.core_bandwidth_mbps),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, "must be positive"));
            }
        }
        if !(0.0..=100.0).contains(&self.loss_pct) {
            return Err(Error::config("loss_pct", "must lie in [0, 100]"));
        }
        if !(self.prop_delay_ms >= 0.0 && self.prop_delay_ms.is_finite()) {
            return Err(Error::config("prop_delay_ms", "must be non-negative"));
        }
        if !(self.stagger_ms >= 0.0 && self.stagger_ms.is_finite()) {
            return Err(Error::config("stagger_ms", "must be non-negative"));
        }
        if self.queue_limit_packets == 0 {
            return Err(Error::config("queue_limit_packets", "must be at least 1"));
        }
        if self.topology.consumers == 0 {
            return Err(Error::config("topology.consumers", "must be at least 1"));
        }
        self.access_spec().validate()?;
        self.core_spec().validate()?;
        self.inds.consumer.validate()?;
        self.dash.validate()
    }

    pub fn loss(&self) -> LossModel {
        self.loss_model
            .unwrap_or_else(|| LossModel::bernoulli(self.loss_pct / 100.0))
    }

    pub fn access_spec(&self) -> LinkSpec {
        LinkSpec {
            bandwidth_bps: (self.bandwidth_mbps * 1e6).round() as u64,
            prop_delay_ms: self.prop_delay_ms,
            loss: self.loss(),
            queue_limit_packets: self.queue_limit_packets,
        }
    }

    pub fn core_spec(&self) -> LinkSpec {
        LinkSpec {
            bandwidth_bps: (self.core_bandwidth_mbps * 1e6).round() as u64,
            prop_delay_ms: self.prop_delay_ms,
            loss: match self.loss_scope {
                LossScope::Access => LossModel::None,
                LossScope::All => self.loss(),
            },
            queue_limit_packets: self.queue_limit_packets,
        }
    }

    pub fn topology_kind(&self) -> TopologyKind {
        match self.protocol {
            Protocol::Inds => self.topology.inds,
            _ => self.topology.dash,
        }
    }

    pub fn build_topology(&self) -> Result<(Topology, Vec<Link>)> {
        let topo = Topology::build(
            self.topology_kind(),
            TopologyParams {
                consumers: self.topology.consumers,
                forwarders: self.topology.forwarders,
            },
        )?;
        let links = topo.instantiate_links(self.access_spec(), self.core_spec(), self.seed);
        Ok((topo, links))
    }

    pub fn starts(&self) -> Vec<SimTime> {
        (0..self.topology.consumers)
            .map(|k| time::from_ms(k as f64 * self.stagger_ms))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(ScenarioConfig::from_json("{}").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn round_trip() {
        let c = ScenarioConfig {
            protocol: Protocol::PccDash,
            loss_pct: 0.3,
            ..Default::default()
        };
        assert_eq!(ScenarioConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_key() {
        let key = |text: &str| match ScenarioConfig::from_json(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        assert_eq!(key(r#"{"bandwidth_mbps": -1}"#), "bandwidth_mbps");
        assert_eq!(
            key(r#"{"inds": {"consumer": {"window": "x"}}}"#),
            "inds.consumer.window"
        );
        assert_eq!(key(r#"{"dash": {"bogus": 1}}"#), "dash.bogus");
        assert_eq!(key(r#"{"protocol": "tcp"}"#), "protocol");
        assert_eq!(key(r#"{"loss_pct": 150}"#), "loss_pct");
    }

    #[test]
    fn loss_scope_and_topology_per_protocol() {
        let mut c = ScenarioConfig {
            loss_pct: 1.0,
            ..Default::default()
        };
        assert_eq!(c.access_spec().loss, LossModel::Bernoulli { p: 0.01 });
        assert_eq!(c.core_spec().loss, LossModel::None);
        c.loss_scope = LossScope::All;
        assert_eq!(c.core_spec().loss, LossModel::Bernoulli { p: 0.01 });
        assert_eq!(c.topology_kind(), TopologyKind::IndsTree);
        c.protocol = Protocol::DashPc;
        assert_eq!(c.topology_kind(), TopologyKind::CdnThreeTier);
        let (topo, links) = c.build_topology().unwrap();
        assert_eq!(links.len(), topo.edges.len());
        assert_eq!(c.starts()[3], time::from_ms(600.0));
    }
}
