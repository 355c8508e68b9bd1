#include "volterra/parallel.hpp"

#include <omp.h>

namespace volterra {

int worker_count() { return omp_get_max_threads(); }

void set_worker_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace volterra
