//! Entanglement, teleportation fidelity and localizable concurrence of
//! GHZ-type states under two-stage amplitude damping with local NOT gates.

pub mod channels;
pub mod cli;
pub mod localizable;
pub mod measures;
pub mod protocols;
pub mod qmat;
pub mod sweeps;
pub mod telefid;
pub mod twirl;

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Qmat(#[from] qmat::QmatError),
    #[error(transparent)]
    Channel(#[from] channels::ChannelError),
    #[error(transparent)]
    Localizable(#[from] localizable::LocalizableError),
    #[error(transparent)]
    Measures(#[from] measures::MeasuresError),
    #[error(transparent)]
    Protocol(#[from] protocols::ProtocolError),
    #[error(transparent)]
    Sweep(#[from] sweeps::SweepError),
    #[error(transparent)]
    Telefid(#[from] telefid::TelefidError),
    #[error(transparent)]
    Twirl(#[from] twirl::TwirlError),
}
