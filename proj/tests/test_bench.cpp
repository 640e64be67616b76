// placeholder while the core modules come up
