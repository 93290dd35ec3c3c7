# package init
