"""Built-in case studies: ventilation, air-source and ground-source heat pumps."""
