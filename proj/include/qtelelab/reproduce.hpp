#pragma once

#include "qtelelab/qcore.hpp"

#include <string>
#include <vector>

namespace qtl {

/// A computed table next to the embedded reference values it is compared with.
struct ReproTable {
  std::string id;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  bool ok = true;  // every compared cell within tolerance
  std::size_t compared = 0;
  std::size_t failed = 0;

  std::string to_csv() const;
};

/// noise-tab2 | noise-tab1 | avfid-figures | table-one | ch2-fidelities | ch5-deviations
ReproTable reproduce(const std::string& id);
const std::vector<std::string>& reproduce_ids();

/// Fixed-point formatting independent of the global locale.
std::string format_fixed(double x, int digits = 6);

/// Bell state on qubits 0,1 with the ancilla (qubit 2) in |0>.
StateVector bell_ancilla_state(Bell b);
Bell fixture_bell(const std::string& name);
Mat hermitian_part(const Mat& m);

}  // namespace qtl
