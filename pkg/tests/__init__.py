# component_id: tests_pkg_init
# status: stable
# authority_level: 3
# kind: code
# area: meta
# purpose: Test package initializer.