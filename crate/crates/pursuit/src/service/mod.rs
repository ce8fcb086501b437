//! Live sessions: an external client plays the evader against the pursuer
//! team, one action per tick.

pub mod channel;
pub mod protocol;

use std::time::{Duration, Instant};

use pursuit_core::geom::Vec2;
use pursuit_core::policy::EvaderKind;
use pursuit_core::sim::{Game, Outcome, SimError, StepRecord};
use thiserror::Error;

use crate::run::OutcomeKind;
use crate::scenario::{self, Scenario};
use channel::{Channel, Event};
use protocol::{Action, End, ErrorReply, Hello, Limits, Reset, SessionMessage, StateUpdate};

/// What the evader does in a tick without a (valid) client action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdlePolicy {
    #[default]
    Zero,
    RepeatLast,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionOptions {
    pub tick_rate: f64,
    /// Advance as soon as the tick's action is in instead of waiting for the
    /// deadline. Scripted clients use this to replay at full speed.
    pub lockstep: bool,
    pub idle: IdlePolicy,
    /// How long a dropped session waits for a client to reconnect.
    pub session_timeout: Duration,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            tick_rate: 10.0,
            lockstep: false,
            idle: IdlePolicy::Zero,
            session_timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("sessions need an external evader")]
    NotExternal,
    #[error("tick rate must be positive and finite")]
    BadTickRate,
    #[error("client disconnected and did not come back")]
    Abandoned,
    #[error("simulation: {0}")]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone)]
pub struct SessionSummary {
    /// `None` when the client ended the session early.
    pub outcome: Option<Outcome>,
    /// Every applied (clamped) evader action since the last reset.
    pub actions: Vec<Vec2>,
    /// Initial state, then one record per tick since the last reset.
    pub records: Vec<StepRecord>,
}

pub fn state_update(game: &Game, rec: &StepRecord) -> StateUpdate {
    let pt = |p: Vec2| [p.x, p.y];
    StateUpdate {
        t: rec.t,
        pursuers: rec.pursuers.iter().map(|&p| pt(p)).collect(),
        evader: pt(rec.evader),
        sector_rays: game.sectors().map(|s| s.partition().ray_angles()).unwrap_or_default(),
        capture_radius: game.config().capture_radius,
        encircled: rec.encircled,
        captured: rec.captured,
        hull_signed_dist: rec.hull_distance_assigned,
        hull: rec.hull_members.clone(),
        min_pursuer_dist: rec.min_pursuer_distance,
        last_action: pt(rec.evader_control),
    }
}

fn outcome_kind(o: Outcome) -> OutcomeKind {
    match o {
        Outcome::Captured(_) => OutcomeKind::Captured,
        Outcome::Escaped(_) => OutcomeKind::Escaped,
        Outcome::Timeout => OutcomeKind::Timeout,
    }
}

fn hello(game: &Game, opts: &SessionOptions) -> SessionMessage {
    let c = game.config();
    SessionMessage::Hello(Hello {
        agent: "pursuit-server".into(),
        limits: Some(Limits {
            evader_speed: c.evader_speed,
            pursuer_speed: c.pursuer_speed,
            capture_radius: c.capture_radius,
            tick_rate: opts.tick_rate,
        }),
    })
}

fn reset_game(r: &Reset) -> Result<Game, String> {
    let text = match (&r.scenario, &r.config) {
        (Some(name), None) => scenario::bundled(name)
            .ok_or_else(|| format!("unknown scenario `{name}`"))?
            .to_string(),
        (None, Some(text)) => text.clone(),
        _ => return Err("reset needs exactly one of `scenario` and `config`".into()),
    };
    let mut s = Scenario::parse(&text).map_err(|e| e.to_string())?;
    s.config.evader_policy = EvaderKind::External;
    Game::new(s.config).map_err(|e| e.to_string())
}

/// Clamps a client action into the evader's input box; non-finite input
/// counts as no input.
pub fn clamp_action(a: &Action, evader_speed: f64) -> Option<Vec2> {
    let u = Vec2::new(a.ux, a.uy);
    u.is_finite().then(|| u.clamp_inf(evader_speed))
}

/// Runs one session. Each tick sends a state update, collects the client's
/// action until the tick deadline (the idle policy fills in when none
/// arrives), and advances the game. Ends with an `End` message on capture or
/// at the step cap. A dropped client pauses the game until a new one
/// connects or `session_timeout` passes.
pub fn session_loop<C: Channel>(
    mut game: Game,
    channel: &mut C,
    opts: &SessionOptions,
) -> Result<SessionSummary, SessionError> {
    if game.config().evader_policy != EvaderKind::External {
        return Err(SessionError::NotExternal);
    }
    if !(opts.tick_rate.is_finite() && opts.tick_rate > 0.0) {
        return Err(SessionError::BadTickRate);
    }
    let period = Duration::from_secs_f64(1.0 / opts.tick_rate);
    let mut records = vec![game.snapshot()];
    let mut actions = Vec::new();
    let mut last = Vec2::ZERO;

    // Send failures show up as a closed mailbox on the next read.
    let _ = channel.send(&hello(&game, opts));
    let _ = channel.send(&SessionMessage::StateUpdate(state_update(&game, &records[0])));

    'ticks: loop {
        if game.is_over() {
            let outcome = game.outcome();
            let _ = channel.send(&SessionMessage::End(End {
                outcome: outcome_kind(outcome),
                t: game.state().t,
            }));
            return Ok(SessionSummary {
                outcome: Some(outcome),
                actions,
                records,
            });
        }
        let t = game.state().t;
        let mut deadline = Instant::now() + period;
        let fresh = |a: &Action| a.t.is_none_or(|at| at == t);
        let chosen = loop {
            match channel.mailbox().next(deadline, opts.lockstep) {
                Event::Action(a) if fresh(&a) => break Some(a),
                Event::Action(_) => {}
                Event::Deadline(a) => break a.filter(fresh),
                Event::Malformed(e) => {
                    log::warn!("t = {t}: {e}");
                    let _ = channel.send(&SessionMessage::Error(ErrorReply { message: e.to_string() }));
                }
                Event::Message(SessionMessage::Reset(r)) => match reset_game(&r) {
                    Ok(g) => {
                        log::info!("session reset");
                        game = g;
                        records = vec![game.snapshot()];
                        actions.clear();
                        last = Vec2::ZERO;
                        channel.mailbox().clear_action();
                        let _ = channel.send(&hello(&game, opts));
                        let _ = channel.send(&SessionMessage::StateUpdate(state_update(&game, &records[0])));
                        continue 'ticks;
                    }
                    Err(message) => {
                        let _ = channel.send(&SessionMessage::Error(ErrorReply { message }));
                    }
                },
                Event::Message(SessionMessage::End(_)) => {
                    log::info!("client ended the session at t = {t}");
                    return Ok(SessionSummary {
                        outcome: None,
                        actions,
                        records,
                    });
                }
                Event::Message(SessionMessage::Hello(h)) => log::debug!("hello from {}", h.agent),
                Event::Message(_) => {
                    let _ = channel.send(&SessionMessage::Error(ErrorReply {
                        message: "clients may send hello, action, reset or end".into(),
                    }));
                }
                Event::Closed => {
                    log::info!("client gone at t = {t}; pausing");
                    if !channel.reconnect(Instant::now() + opts.session_timeout) {
                        return Err(SessionError::Abandoned);
                    }
                    let rec = records.last().expect("records start with the initial state");
                    let _ = channel.send(&hello(&game, opts));
                    let _ = channel.send(&SessionMessage::StateUpdate(state_update(&game, rec)));
                    deadline = Instant::now() + period;
                }
            }
        };

        let u = match chosen.as_ref().and_then(|a| clamp_action(a, game.config().evader_speed)) {
            Some(u) => u,
            None if opts.idle == IdlePolicy::RepeatLast => last,
            None => Vec2::ZERO,
        };
        last = u;
        let rec = game.tick_with(Some(u))?;
        actions.push(rec.evader_control);
        let _ = channel.send(&SessionMessage::StateUpdate(state_update(&game, &rec)));
        records.push(rec);
    }
}
