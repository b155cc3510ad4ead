//! Explicit Runge–Kutta integration of `dx/dt = f(t, x, p)` with dense output.

mod solver;
mod trajectory;

pub use solver::{integrate, integrate_linear, integrate_ltv, IntegratorConfig, Method};
pub use trajectory::Trajectory;

/// Right-hand side of an ODE with a fixed parameter vector.
pub trait OdeSystem<T> {
    fn dimension(&self) -> usize;
    fn rhs(&self, t: T, x: &[T], params: &[T], dx: &mut [T]);
}

/// Adapts a closure `(t, x, p, dx)` into an [`OdeSystem`].
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F> FnSystem<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T, F> OdeSystem<T> for FnSystem<F>
where
    F: Fn(T, &[T], &[T], &mut [T]),
{
    fn dimension(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: T, x: &[T], params: &[T], dx: &mut [T]) {
        (self.f)(t, x, params, dx)
    }
}

impl<T, S: OdeSystem<T> + ?Sized> OdeSystem<T> for &S {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn rhs(&self, t: T, x: &[T], params: &[T], dx: &mut [T]) {
        (**self).rhs(t, x, params, dx)
    }
}
