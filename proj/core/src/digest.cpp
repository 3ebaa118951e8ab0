#include "embedkit/digest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "embedkit/errors.hpp"

namespace embedkit {

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string fnv1a64_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fnv1a64_hex(buffer.str());
}

}  // namespace embedkit
