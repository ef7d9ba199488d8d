#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace alienzoo {

class StudyService;

/// Participant API under /api and bearer-token admin API under /admin. An empty admin
/// token disables every admin route (401).
void register_routes(httplib::Server& server, StudyService& service, std::string admin_token);

}  // namespace alienzoo
