"""Surface models and the induced-metric linear algebra."""
