use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::thread;
use std::time::Duration;

use pursuit::run::OutcomeKind;
use pursuit::scenario::{Scenario, FIVE_PURSUERS};
use pursuit::service::channel::{memory_pair, MemoryClient, TcpChannel};
use pursuit::service::protocol::{decode, encode, Action, Reset, SessionMessage, StateUpdate};
use pursuit::service::{clamp_action, session_loop, IdlePolicy, SessionError, SessionOptions};
use pursuit_core::geom::Vec2;
use pursuit_core::policy::EvaderKind;
use pursuit_core::sim::{Game, Outcome, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WAIT: Duration = Duration::from_secs(10);

fn external_config() -> ScenarioConfig {
    let mut s = Scenario::parse(FIVE_PURSUERS).unwrap();
    s.config.evader_policy = EvaderKind::External;
    s.config
}

fn lockstep() -> SessionOptions {
    SessionOptions {
        lockstep: true,
        ..SessionOptions::default()
    }
}

/// Raw actions with a share of out-of-range values.
fn action_log(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = if rng.random_bool(0.3) { 4.0 } else { 1.0 };
            (rng.random_range(-r..=r), rng.random_range(-r..=r))
        })
        .collect()
}

fn next_state(client: &MemoryClient) -> StateUpdate {
    loop {
        match client.recv(WAIT).expect("server message") {
            SessionMessage::StateUpdate(s) => return s,
            SessionMessage::Hello(_) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}

fn bits(p: [f64; 2]) -> [u64; 2] {
    [p[0].to_bits(), p[1].to_bits()]
}

#[test]
fn scripted_client_reproduces_the_offline_run() {
    let cfg = external_config();
    let log = action_log(1000, 7);
    let (mut server, client) = memory_pair();
    let game = Game::new(cfg.clone()).unwrap();
    let handle = thread::spawn(move || session_loop(game, &mut server, &lockstep()));

    let mut seen = vec![next_state(&client)];
    let end = loop {
        let t = seen.last().unwrap().t;
        let (ux, uy) = log[t];
        client.send(&SessionMessage::Action(Action { ux, uy, t: Some(t) }));
        match client.recv(WAIT).unwrap() {
            SessionMessage::StateUpdate(s) => seen.push(s),
            other => panic!("{other:?}"),
        }
        if seen.last().unwrap().captured || seen.last().unwrap().t == cfg.max_steps {
            break client.recv(WAIT).unwrap();
        }
    };
    let summary = handle.join().unwrap().unwrap();

    let mut offline = Game::new(cfg.clone()).unwrap();
    let mut records = vec![offline.snapshot()];
    while !offline.is_over() {
        let (ux, uy) = log[offline.state().t];
        let u = clamp_action(&Action { ux, uy, t: None }, cfg.evader_speed).unwrap();
        records.push(offline.tick_with(Some(u)).unwrap());
    }

    assert_eq!(summary.outcome, Some(offline.outcome()));
    assert_eq!(summary.records, records);
    assert_eq!(seen.len(), records.len());
    for (s, r) in seen.iter().zip(&records) {
        assert_eq!(s.t, r.t);
        assert_eq!(bits(s.evader), bits([r.evader.x, r.evader.y]));
        for (p, q) in s.pursuers.iter().zip(&r.pursuers) {
            assert_eq!(bits(*p), bits([q.x, q.y]));
        }
        assert_eq!(s.hull_signed_dist.to_bits(), r.hull_distance_assigned.to_bits());
        assert!(s.encircled, "t = {}", s.t);
    }
    let Outcome::Captured(t) = offline.outcome() else {
        panic!("{:?}", offline.outcome())
    };
    match end {
        SessionMessage::End(e) => assert_eq!((e.outcome, e.t), (OutcomeKind::Captured, t)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn out_of_range_actions_are_clamped_server_side() {
    let (mut server, client) = memory_pair();
    let game = Game::new(external_config()).unwrap();
    let handle = thread::spawn(move || session_loop(game, &mut server, &lockstep()));
    let s0 = next_state(&client);
    client.send(&SessionMessage::Action(Action { ux: 5.0, uy: 5.0, t: None }));
    let s1 = next_state(&client);
    assert_eq!(s1.last_action, [1.0, 1.0]);
    assert_eq!(s1.evader, [s0.evader[0] + 1.0, s0.evader[1] + 1.0]);
    client.send(&SessionMessage::Action(Action { ux: -1e300, uy: 0.25, t: None }));
    assert_eq!(next_state(&client).last_action, [-1.0, 0.25]);
    client.send(&SessionMessage::End(pursuit::service::protocol::End {
        outcome: OutcomeKind::Timeout,
        t: 2,
    }));
    let summary = handle.join().unwrap().unwrap();
    assert_eq!(summary.outcome, None);
    assert_eq!(summary.actions, vec![Vec2::new(1.0, 1.0), Vec2::new(-1.0, 0.25)]);
}

#[test]
fn silent_ticks_apply_the_idle_action() {
    let opts = SessionOptions {
        tick_rate: 200.0,
        ..SessionOptions::default()
    };
    let (mut server, client) = memory_pair();
    let game = Game::new(external_config()).unwrap();
    let handle = thread::spawn(move || session_loop(game, &mut server, &opts));
    let s0 = next_state(&client);
    for t in 1..=3 {
        let s = next_state(&client);
        assert_eq!((s.t, s.last_action, s.evader), (t, [0.0, 0.0], s0.evader));
    }
    drop(client);
    assert!(matches!(handle.join().unwrap(), Err(SessionError::Abandoned)));

    let opts = SessionOptions {
        tick_rate: 200.0,
        lockstep: true,
        idle: IdlePolicy::RepeatLast,
        ..SessionOptions::default()
    };
    let (mut server, client) = memory_pair();
    let game = Game::new(external_config()).unwrap();
    let handle = thread::spawn(move || session_loop(game, &mut server, &opts));
    next_state(&client);
    client.send(&SessionMessage::Action(Action { ux: 0.5, uy: 0.0, t: None }));
    assert_eq!(next_state(&client).last_action, [0.5, 0.0]);
    assert_eq!(next_state(&client).last_action, [0.5, 0.0]);
    drop(client);
    assert!(handle.join().unwrap().is_err());
}

#[test]
fn malformed_and_stale_input_is_reported_and_ignored() {
    let (mut server, client) = memory_pair();
    let game = Game::new(external_config()).unwrap();
    let handle = thread::spawn(move || session_loop(game, &mut server, &lockstep()));
    let first = next_state(&client);
    client.send_raw(r#"{"v":1,"type":"action","ux":1"#);
    assert!(matches!(client.recv(WAIT), Some(SessionMessage::Error(_))));
    client.send_raw(r#"{"v":9,"type":"action","ux":1,"uy":0}"#);
    match client.recv(WAIT) {
        Some(SessionMessage::Error(e)) => assert!(e.message.contains("version"), "{}", e.message),
        other => panic!("{other:?}"),
    }
    // Well-formed, but a state update is not something a client may send.
    client.send(&SessionMessage::StateUpdate(first));
    assert!(matches!(client.recv(WAIT), Some(SessionMessage::Error(_))));
    // Tagged for another tick: dropped, then the one for this tick applies.
    client.send(&SessionMessage::Action(Action { ux: 1.0, uy: 1.0, t: Some(5) }));
    client.send(&SessionMessage::Action(Action { ux: -1.0, uy: 0.0, t: Some(0) }));
    let s = next_state(&client);
    assert_eq!((s.t, s.last_action), (1, [-1.0, 0.0]));
    drop(client);
    assert!(handle.join().unwrap().is_err());
}

#[test]
fn reset_restarts_from_a_named_or_inline_scenario() {
    let (mut server, client) = memory_pair();
    let game = Game::new(external_config()).unwrap();
    let handle = thread::spawn(move || session_loop(game, &mut server, &lockstep()));
    next_state(&client);
    client.send(&SessionMessage::Action(Action { ux: 1.0, uy: 0.0, t: None }));
    assert_eq!(next_state(&client).t, 1);

    client.send(&SessionMessage::Reset(Reset {
        scenario: Some("nowhere".into()),
        config: None,
    }));
    assert!(matches!(client.recv(WAIT), Some(SessionMessage::Error(_))));

    client.send(&SessionMessage::Reset(Reset {
        scenario: Some("five_pursuers".into()),
        config: None,
    }));
    let s = next_state(&client);
    assert_eq!((s.t, s.evader, s.pursuers[0]), (0, [0.0, 0.0], [10.0, 90.0]));
    assert_eq!(s.sector_rays.len(), 4);

    let inline = "pursuers = 6,0; 0,6; -6,0; 0,-6\nevader = 0,0\ncapture_radius = 2\n";
    client.send(&SessionMessage::Reset(Reset {
        scenario: None,
        config: Some(inline.into()),
    }));
    let s = next_state(&client);
    assert_eq!((s.t, s.pursuers.len(), s.capture_radius), (0, 4, 2.0));
    client.send(&SessionMessage::Action(Action { ux: 0.0, uy: 0.0, t: None }));
    let mut last = next_state(&client);
    while !last.captured {
        client.send(&SessionMessage::Action(Action { ux: 0.0, uy: 0.0, t: None }));
        last = next_state(&client);
    }
    assert!(matches!(client.recv(WAIT), Some(SessionMessage::End(_))));
    let summary = handle.join().unwrap().unwrap();
    assert!(matches!(summary.outcome, Some(Outcome::Captured(_))));
    assert_eq!(summary.records.len(), last.t + 1);
}

#[test]
fn non_external_games_are_refused() {
    let (mut server, _client) = memory_pair();
    let mut cfg = external_config();
    cfg.evader_policy = EvaderKind::Static;
    let game = Game::new(cfg).unwrap();
    assert!(matches!(
        session_loop(game, &mut server, &SessionOptions::default()),
        Err(SessionError::NotExternal)
    ));
}

struct Line(BufReader<TcpStream>, TcpStream);

impl Line {
    fn connect(addr: std::net::SocketAddr) -> Self {
        let s = TcpStream::connect(addr).unwrap();
        s.set_read_timeout(Some(WAIT)).unwrap();
        Line(BufReader::new(s.try_clone().unwrap()), s)
    }

    fn send(&mut self, m: &SessionMessage) {
        writeln!(self.1, "{}", encode(m)).unwrap();
    }

    fn state(&mut self) -> StateUpdate {
        loop {
            let mut buf = String::new();
            assert!(self.0.read_line(&mut buf).unwrap() > 0, "server closed");
            match decode(&buf).unwrap() {
                SessionMessage::StateUpdate(s) => return s,
                SessionMessage::Hello(_) => {}
                other => panic!("{other:?}"),
            }
        }
    }
}

#[test]
fn tcp_session_pauses_while_the_client_is_away() {
    let mut channel = TcpChannel::bind("127.0.0.1:0").unwrap();
    let addr = channel.local_addr().unwrap();
    let handle = thread::spawn(move || {
        channel.accept(None).unwrap();
        session_loop(Game::new(external_config()).unwrap(), &mut channel, &lockstep())
    });

    let mut a = Line::connect(addr);
    assert_eq!(a.state().t, 0);
    for t in 0..3 {
        a.send(&SessionMessage::Action(Action { ux: 1.0, uy: 0.0, t: Some(t) }));
        assert_eq!(a.state().t, t + 1);
    }
    drop(a);
    thread::sleep(Duration::from_millis(300));

    let mut b = Line::connect(addr);
    let s = b.state();
    assert_eq!((s.t, s.evader), (3, [3.0, 0.0]));
    b.send(&SessionMessage::Action(Action { ux: 0.0, uy: 1.0, t: Some(3) }));
    let s = b.state();
    assert_eq!((s.t, s.evader), (4, [3.0, 1.0]));
    b.send(&SessionMessage::End(pursuit::service::protocol::End {
        outcome: OutcomeKind::Timeout,
        t: 4,
    }));
    let summary = handle.join().unwrap().unwrap();
    assert_eq!(summary.records.len(), 5);
}
