//! Learning very large bounded-degree graphs under unknown vertex
//! distributions: Radon-Nikodym sampling oracles, labeled-ball statistics,
//! weighted distances to graph properties, hyperfinite partitions, local
//! algorithms and observing oracles, with exact oracles for verification.

pub mod ball;
pub mod canon;
pub mod distances;
pub mod error;
pub mod generators;
pub mod graph;
pub mod label;
pub mod local;
pub mod matching;
pub mod mis;
pub mod oracles;
pub mod partitions;
pub mod properties;
pub mod quotient;
pub mod scenarios;
pub mod simplex;
pub mod stats;
pub mod testers;

pub use ball::{extract_ball, LabeledBall};
pub use canon::{canonicalize, CanonicalBallKey, GraphKey};
pub use error::{Error, Result};
pub use graph::{build_graph, WeightedGraph};
pub use label::{truncate_label, FixedPointLabel};
pub use quotient::TreeQuotient;
