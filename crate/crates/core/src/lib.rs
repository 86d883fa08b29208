pub mod comments;
pub mod error;
pub mod events;
pub mod filter;
pub mod influence;
pub mod network;
pub mod rng;
pub mod update;
pub mod metrics;
pub mod config;
pub mod sim;
pub mod ensemble;
pub mod export;
pub mod analysis;
