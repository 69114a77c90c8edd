#pragma once

namespace bbsi {

/// Number of threads the dense kernel backend may use.
///
/// The setting is process-global (it maps onto the BLAS library's own
/// switch), so it must only be changed from single-threaded sections of a
/// solver, never from inside concurrent tasks.
void set_kernel_threads(int n);
int kernel_threads();

/// RAII guard restoring the previous kernel thread count.
class KernelThreadGuard {
public:
    explicit KernelThreadGuard(int n) : previous_(kernel_threads()) { set_kernel_threads(n); }
    ~KernelThreadGuard() { set_kernel_threads(previous_); }
    KernelThreadGuard(const KernelThreadGuard&) = delete;
    KernelThreadGuard& operator=(const KernelThreadGuard&) = delete;

private:
    int previous_;
};

}  // namespace bbsi
