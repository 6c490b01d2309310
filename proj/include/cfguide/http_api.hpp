#pragma once

#include "cfguide/session_service.hpp"

#include <string>

namespace httplib {
class Server;
}

namespace cfguide {

// Maps an error code to its HTTP status: 404 not_found, 409 state conflicts,
// 400 other user errors, 500 everything else.
int http_status_for(std::string_view code);

// Installs every route of the session API on `server`. The service must
// outlive the server. Port binding is exclusive.
void register_routes(httplib::Server& server, SessionService& service);

}  // namespace cfguide
