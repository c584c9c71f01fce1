#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "policygraph/engine.hpp"

namespace pg {

// JSON-RPC 2.0 over line-delimited messages. Methods: initialize, ping,
// tools/list, tools/call, resources/list, resources/read, prompts/list,
// prompts/get. Malformed lines and failing tools produce error responses;
// the loop itself never dies on bad input.
class RpcServer {
  public:
    explicit RpcServer(Engine& engine) : engine_(engine) {}

    // One request line -> one response line (nullopt for notifications).
    std::optional<std::string> handle_line(const std::string& line);

    // Reads requests until EOF. Returns 0.
    int serve(std::istream& in, std::ostream& out);

  private:
    nlohmann::json dispatch(const std::string& method, const nlohmann::json& params);

    Engine& engine_;
};

} // namespace pg
