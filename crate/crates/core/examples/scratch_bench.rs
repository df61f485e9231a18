use spin_star::evolution::{run_trajectory, TimeGrid};
use spin_star::model::CentralState;
use spin_star::symmetry::{Beta, ModelParams};
use std::time::Instant;

fn main() {
    // P-only run, N=201, beta=0, short grid extrapolated
    let params = ModelParams::new(1.0, 1.0, 0.1, 201, Beta::Finite(0.0)).unwrap();
    let grid = TimeGrid::from_t_max(0.05, 20.0).unwrap();
    let t0 = Instant::now();
    let traj = run_trajectory(&params, &CentralState::up(), &grid, false).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "P-only N=201 {} steps: {:.2} s  (-> {:.0} s for 4001 steps)  P(20)={:.6}",
        grid.n_steps, dt, dt / grid.n_steps as f64 * 4001.0,
        traj.central_states.last().unwrap().rho[[0, 0]].re
    );

    // entropy run, N=201 beta=0.1, short grid
    let params = ModelParams::new(1.0, 1.0, 0.1, 201, Beta::Finite(0.1)).unwrap();
    let grid = TimeGrid::from_t_max(0.05, 2.0).unwrap();
    let t0 = Instant::now();
    let traj = run_trajectory(&params, &CentralState::up(), &grid, true).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let ent = traj.entropies.as_ref().unwrap();
    println!(
        "entropies N=201 {} steps: {:.2} s ({:.3} s/step -> {:.0} s for 4001)  I(2)={:.4}",
        grid.n_steps, dt, dt / grid.n_steps as f64, dt / grid.n_steps as f64 * 4001.0,
        ent.mutual.last().unwrap()
    );

    // single-sector entropy run (beta = inf)
    let params = ModelParams::new(1.0, 1.0, 0.1, 201, Beta::Infinite).unwrap();
    let grid = TimeGrid::from_t_max(0.05, 50.0).unwrap();
    let t0 = Instant::now();
    let traj = run_trajectory(&params, &CentralState::up(), &grid, true).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let ent = traj.entropies.as_ref().unwrap();
    let maxi = ent.mutual.iter().cloned().fold(0.0f64, f64::max);
    println!(
        "entropies N=201 beta=inf {} steps: {:.2} s (-> {:.0} s for 8001)  max I={:.4}",
        grid.n_steps, dt, dt / grid.n_steps as f64 * 8001.0, maxi
    );
}
