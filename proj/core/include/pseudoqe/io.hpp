#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace pseudoqe {

// Writes to a temporary file in the target directory and renames it into
// place on commit. A run that dies mid-write leaves no partial output.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path);
  ~AtomicFile();

  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return out_; }
  void commit();

 private:
  std::string path_;
  std::string tmp_path_;
  std::ofstream out_;
  bool committed_ = false;
};

// Shortest representation that parses back to the same double. Used for every
// numeric field in text outputs so that repeated runs are byte-identical.
std::string format_double(double v);

// Whole file as a list of lines, without trailing newlines. Throws
// ValidationError if the file cannot be opened.
std::vector<std::string> read_lines(const std::string& path);

// fn(index) over [0, n), distributed round-robin over `jobs` threads.
// fn must only touch its own index's slot; exceptions are rethrown on the
// caller thread.
void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace pseudoqe
