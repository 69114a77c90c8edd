#include "bbsi/threading.hpp"

#include <cblas.h>

namespace bbsi {

namespace {
int g_threads = 1;
}

void set_kernel_threads(int n) {
    if (n < 1) n = 1;
    g_threads = n;
    openblas_set_num_threads(n);
}

int kernel_threads() { return g_threads; }

}  // namespace bbsi
